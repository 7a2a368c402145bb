#pragma once

#include <string>
#include <utility>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/util/rng.hpp"

namespace molga::disc {

// Binary feature vector stored sparsely: the fingerprint's on-bits over a
// fixed width. Values are implicitly 1.0 at listed positions, 0 elsewhere.
struct FeatureVector {
  int width = 0;
  std::vector<int> on_bits;  // strictly ascending
};

// Folded circular fingerprint cast to {0,1} reals.
FeatureVector featurize(const chem::MoleculeGraph& mol, int width = 2048, int radius = 2);

// Reference molecules carry label 1 under `original`; under `flipped` the
// population carries label 1 instead.
enum class LabelConvention { original, flipped };

struct DiscriminatorConfig {
  int input_width = 2048;
  std::vector<int> hidden{100, 10};  // empty = logistic regression
  double learning_rate = 0.001;
  double weight_decay = 1e-4;  // classic L2 added to weight gradients; biases exempt
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 256;
  int epochs_per_generation = 10;
};

using Batch = std::vector<std::pair<FeatureVector, int>>;

// Feedforward classifier with sigmoid activations on every layer and a
// single sigmoid output; trained on mean binary cross-entropy with Adam.
class DiscriminatorModel {
 public:
  // Xavier-uniform weights, zero biases, fresh optimizer state.
  static DiscriminatorModel create(const DiscriminatorConfig& config, util::Rng& rng);

  double forward(const FeatureVector& x) const;

  // Mean BCE over the batch without updating anything.
  double batch_loss(const Batch& batch) const;

  // Analytic d(mean BCE)/d(parameter) in flat parameter order. Weight
  // decay is an update-rule term, not part of the loss, so it is absent.
  std::vector<double> gradients(const Batch& batch) const;

  // One Adam step on the mean-BCE gradient (plus L2 pull on weights).
  // Returns the pre-update mean loss; throws std::runtime_error when the
  // loss is not finite.
  double train_step(const Batch& batch);

  // One GA generation of training: labeled union of reference sample and
  // population, seeded shuffle, fixed-size mini-batches, several epochs.
  // Returns the mean pre-update loss over the final epoch.
  double train_generation(const std::vector<FeatureVector>& reference,
                          const std::vector<FeatureVector>& population,
                          LabelConvention convention, util::Rng& rng);

  // Flat parameter vector: layers in order, each weights row-major then
  // biases. Setter keeps optimizer state untouched.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& params);

  // Bit-exact text checkpoint (hexfloat) of config, parameters and
  // optimizer state.
  void save(const std::string& path) const;
  static DiscriminatorModel load(const std::string& path);

  const DiscriminatorConfig& config() const { return config_; }
  long long step_count() const { return step_; }

  bool operator==(const DiscriminatorModel& other) const;

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;   // out x in, row-major
    std::vector<double> b;   // out
    std::vector<double> mw;  // Adam first moment, weights
    std::vector<double> vw;  // Adam second moment, weights
    std::vector<double> mb;
    std::vector<double> vb;
  };

  struct ForwardTrace {
    std::vector<std::vector<double>> activations;  // per layer, post-sigmoid
  };

  double forward_traced(const FeatureVector& x, ForwardTrace* trace) const;
  void accumulate_gradients(const Batch& batch, std::vector<Layer>& grads) const;

  DiscriminatorConfig config_;
  std::vector<Layer> layers_;
  long long step_ = 0;
};

}  // namespace molga::disc
