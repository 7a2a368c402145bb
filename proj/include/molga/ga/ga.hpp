#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/descriptors/descriptors.hpp"
#include "molga/disc/discriminator.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/util/rng.hpp"

namespace molga::ga {

// The discriminator weight is fixed for the whole run.
struct ConstantSchedule {
  double beta = 0.0;
};

// beta is 0 until the max-fitness history repeats its last value exactly
// `patience` times on or after `start_generation`; then the penalty applies
// for one generation (or, with hold_until_change, until the max moves).
struct TimeAdaptiveSchedule {
  double beta = 1000.0;
  int patience = 5;
  int start_generation = 100;
  bool hold_until_change = false;
};

// beta is 0 until the mean pairwise similarity of the last `window`
// per-generation best molecules exceeds `threshold` on or after
// `start_generation`; the penalty applies for one generation per trigger.
struct SimilaritySchedule {
  double beta = 1000.0;
  double threshold = 0.8;
  int window = 5;
  int start_generation = 20;
};

using BetaSchedule = std::variant<ConstantSchedule, TimeAdaptiveSchedule, SimilaritySchedule>;

enum class DiscriminatorArch { none, logistic, mlp };

// methane: N copies of [C]. dataset_top: the N best-J reference molecules.
// constraint_target: N copies of the constraint target's encoding.
enum class SeedMode { methane, dataset_top, constraint_target };

struct MutationWeights {
  double replace = 1.0;
  double insert = 1.0;
  double erase = 1.0;
};

struct Constraint {
  chem::MoleculeGraph target;
  double delta = 0.4;  // minimum Tanimoto similarity to stay feasible
};

struct GAConfig {
  int population_size = 500;
  int generations = 100;
  int elitism = 1;
  std::uint64_t seed = 0;
  MutationWeights mutation;
  BetaSchedule schedule = ConstantSchedule{};
  DiscriminatorArch architecture = DiscriminatorArch::none;
  disc::LabelConvention convention = disc::LabelConvention::original;
  bool reinit_discriminator = false;  // fresh model every trained generation
  int reference_sample_size = 500;
  SeedMode seed_mode = SeedMode::methane;
  std::optional<Constraint> constraint;
  // Optional second objective for post-hoc Pareto analysis; when unset,
  // analysis code falls back to negated heavy-atom count.
  std::function<double(const chem::MoleculeGraph&)> second_objective;

  void validate() const;  // throws std::invalid_argument
};

struct Individual {
  selfies::SelfiesString genome;
  chem::MoleculeGraph mol;
  descriptors::FitnessRecord fitness;
};

struct GenerationStats {
  int generation = 0;
  double max_j = 0.0;
  double mean_j = 0.0;
  double max_total = 0.0;
  double beta_used = 0.0;
  double internal_diversity = 0.0;  // over a seeded 100-individual subsample
  double fraction_unique = 0.0;
  double mean_heavy_atoms = 0.0;
  double mean_d = 0.0;  // 0 when no discriminator is configured
  std::string best_smiles;
};

std::string stats_csv_header();
std::string stats_csv_row(const GenerationStats& row);

// Everything a run reads but does not own.
struct RunContext {
  const selfies::Alphabet* alphabet = nullptr;
  const descriptors::DescriptorProvider* provider = nullptr;
  descriptors::NormalizationParams normalization;
  // Reference molecules for discriminator training and dataset seeding.
  const std::vector<chem::MoleculeGraph>* reference = nullptr;
  std::function<void(const GenerationStats&)> on_generation;
};

struct GAState {
  int generation = 0;
  std::vector<Individual> population;
  std::vector<double> max_fitness_history;        // one entry per generation
  std::vector<chem::MoleculeGraph> best_history;  // per-generation best
  // Archive of the highest-J feasible individual seen so far; J rather than
  // total so transient beta spikes cannot hijack it.
  Individual best_of_run;
  bool best_assigned = false;
  std::optional<disc::DiscriminatorModel> model;
  std::optional<double> hold_anchor;  // stagnation value a held penalty watches
  util::Rng rng_evolution{0};
  util::Rng rng_disc{0};
};

// J from the descriptor pipeline; with a model, D = forward(featurize(mol))
// and total = J + beta * D, otherwise total = J.
descriptors::FitnessRecord evaluate(const chem::MoleculeGraph& mol,
                                    const descriptors::DescriptorProvider& provider,
                                    const descriptors::NormalizationParams& normalization,
                                    const disc::DiscriminatorModel* model, double beta);

// Similarity gate: inside the target's Tanimoto ball the record keeps its J
// as total; outside it collapses to the rejection sentinel.
inline constexpr double kInfeasibleTotal = -1e6;
descriptors::FitnessRecord constrained_evaluate(const chem::MoleculeGraph& mol,
                                                const fp::Fingerprint& target_fp, double delta,
                                                const descriptors::DescriptorProvider& provider,
                                                const descriptors::NormalizationParams& normalization);

// Linear rank selection with replacement: weights 1 (worst) .. N (best),
// tied totals share the mean of their positions' weights, so a uniform
// population selects uniformly. Returns indices into `pop`.
std::vector<int> select_parents(const std::vector<Individual>& pop, int count, util::Rng& rng);

// One of replace/insert/delete at a uniform position, operator drawn from
// the configured weights. Insert clamps to the alphabet's length bound;
// delete on a length-1 string degrades to replace.
selfies::SelfiesString mutate(const selfies::SelfiesString& s, util::Rng& rng,
                              const selfies::Alphabet& alphabet, const MutationWeights& weights);

// True iff history holds at least `patience` values and the last `patience`
// are bitwise equal.
bool stagnation_triggered(const std::vector<double>& history, int patience);

// Mean pairwise Tanimoto similarity (unordered pairs) of the last `window`
// molecules; fewer than two molecules give 0.
double window_similarity(const std::vector<chem::MoleculeGraph>& best_history, int window);

// True iff the history holds at least `window` molecules and their
// window_similarity exceeds `threshold`. Schedule start generations are the
// caller's business.
bool similarity_triggered(const std::vector<chem::MoleculeGraph>& best_history, double threshold,
                          int window);

// Seeded initial population, evaluated, with generation-0 histories/stats.
GAState init_state(const GAConfig& config, const RunContext& ctx);

// Elites + mutated rank-selected offspring; trains the discriminator when
// the schedule applies a nonzero beta; evaluates and logs the generation.
void step_generation(GAState& state, const GAConfig& config, const RunContext& ctx);

struct Trajectory {
  std::vector<GenerationStats> rows;  // generation 0 .. generations
  std::vector<Individual> final_population;
  Individual best;
};

Trajectory run(const GAConfig& config, const RunContext& ctx);

// --- Multi-objective utilities (post-hoc analysis) ---

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Indices of the maximal non-dominated subset (maximizing both), ascending,
// so the relative input order is preserved.
std::vector<std::size_t> pareto_front(const std::vector<Point2>& points);

// Area of the union of rectangles [nadir, point]. Every point must strictly
// dominate the nadir in both objectives.
double hypervolume_2d(const std::vector<Point2>& front, Point2 nadir);

}  // namespace molga::ga
