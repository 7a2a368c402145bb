#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/disc/discriminator.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/smiles/smiles.hpp"
#include "molga/util/rng.hpp"

using namespace molga;

namespace {

chem::MoleculeGraph mol(const std::string& smiles) { return smiles::parse_smiles(smiles); }

disc::FeatureVector from_bits(int width, std::vector<int> bits) {
  disc::FeatureVector x;
  x.width = width;
  x.on_bits = std::move(bits);
  return x;
}

disc::DiscriminatorConfig small_config(int input_width, std::vector<int> hidden) {
  disc::DiscriminatorConfig cfg;
  cfg.input_width = input_width;
  cfg.hidden = std::move(hidden);
  return cfg;
}

std::vector<disc::FeatureVector> random_molecule_features(util::Rng& rng, int count, int width) {
  const auto alphabet = selfies::Alphabet::builtin_default();
  std::vector<disc::FeatureVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int length = 5 + static_cast<int>(util::uniform_index(rng, 16));
    const auto m = selfies::decode(selfies::random_selfies(rng, length, alphabet), alphabet);
    out.push_back(disc::featurize(m, width));
  }
  return out;
}

}  // namespace

TEST_CASE("featurize mirrors the fingerprint and ignores atom numbering") {
  const auto x = disc::featurize(mol("C"));
  CHECK(x.width == 2048);
  CHECK(x.on_bits.size() == 1);  // one heavy atom, one environment

  const auto fp = fp::morgan_fp(mol("CCO"), 2, 2048);
  const auto y = disc::featurize(mol("CCO"));
  CHECK(y.on_bits == fp.on_bits());
  CHECK(static_cast<int>(y.on_bits.size()) == fp.popcount());
  CHECK(y.on_bits.size() > 3);  // three heavy atoms, several radii

  const auto a = disc::featurize(mol("CC(C)CO"));
  const auto b = disc::featurize(mol("OCC(C)C"));
  CHECK(a.on_bits == b.on_bits);
}

TEST_CASE("discriminator config validation") {
  util::Rng rng(1);
  CHECK_THROWS_AS(disc::DiscriminatorModel::create(small_config(0, {4}), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(disc::DiscriminatorModel::create(small_config(8, {0}), rng),
                  std::invalid_argument);
  auto bad_lr = small_config(8, {4});
  bad_lr.learning_rate = 0.0;
  CHECK_THROWS_AS(disc::DiscriminatorModel::create(bad_lr, rng), std::invalid_argument);
  auto bad_batch = small_config(8, {4});
  bad_batch.batch_size = 0;
  CHECK_THROWS_AS(disc::DiscriminatorModel::create(bad_batch, rng), std::invalid_argument);
}

TEST_CASE("all-zero parameters score every input 0.5") {
  util::Rng rng(7);
  auto model = disc::DiscriminatorModel::create(small_config(16, {5, 3}), rng);
  model.set_flat_parameters(std::vector<double>(model.flat_parameters().size(), 0.0));
  CHECK(model.forward(from_bits(16, {})) == 0.5);
  CHECK(model.forward(from_bits(16, {0, 3, 15})) == 0.5);
}

TEST_CASE("logistic variant is a plain sigmoid of the affine score") {
  util::Rng rng(11);
  auto model = disc::DiscriminatorModel::create(small_config(6, {}), rng);
  const auto params = model.flat_parameters();
  REQUIRE(params.size() == 7);  // six weights and one bias
  const auto x = from_bits(6, {1, 4});
  const double z = params[1] + params[4] + params[6];
  CHECK(model.forward(x) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-15));
}

TEST_CASE("two-input two-hidden network matches the hand-computed value") {
  util::Rng rng(3);
  auto model = disc::DiscriminatorModel::create(small_config(2, {2}), rng);
  // Layer 1 rows (w00 w01; w10 w11), biases; layer 2 row, bias.
  model.set_flat_parameters({0.5, -0.25, 1.0, 0.75, 0.1, -0.2, -1.5, 2.0, 0.3});
  // Input (1, 0): z1 = (0.5 + 0.1, 1.0 - 0.2); a1 = sigmoid(z1);
  // z2 = -1.5*a1[0] + 2.0*a1[1] + 0.3; p = sigmoid(z2).
  const double a0 = 1.0 / (1.0 + std::exp(-0.6));
  const double a1 = 1.0 / (1.0 + std::exp(-0.8));
  const double expected = 1.0 / (1.0 + std::exp(-(-1.5 * a0 + 2.0 * a1 + 0.3)));
  CHECK(model.forward(from_bits(2, {0})) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("forward rejects mismatched feature width") {
  util::Rng rng(5);
  const auto model = disc::DiscriminatorModel::create(small_config(8, {4}), rng);
  CHECK_THROWS_AS(model.forward(from_bits(16, {2})), std::invalid_argument);
  CHECK_THROWS_AS(model.forward(from_bits(8, {8})), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  util::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = disc::DiscriminatorModel::create(small_config(8, {4}), rng);
    disc::Batch batch;
    const int n = 3 + static_cast<int>(util::uniform_index(rng, 4));
    for (int i = 0; i < n; ++i) {
      std::vector<int> bits;
      for (int bit = 0; bit < 8; ++bit)
        if (util::uniform_unit(rng) < 0.4) bits.push_back(bit);
      batch.emplace_back(from_bits(8, std::move(bits)),
                         static_cast<int>(util::uniform_index(rng, 2)));
    }
    const auto analytic = model.gradients(batch);
    auto params = model.flat_parameters();
    REQUIRE(analytic.size() == params.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      model.set_flat_parameters(params);
      const double up = model.batch_loss(batch);
      params[i] = saved - h;
      model.set_flat_parameters(params);
      const double down = model.batch_loss(batch);
      params[i] = saved;
      model.set_flat_parameters(params);
      const double numeric = (up - down) / (2.0 * h);
      const double diff = std::abs(analytic[i] - numeric);
      const bool ok =
          diff < 1e-9 || diff / std::max(std::abs(analytic[i]), std::abs(numeric)) < 1e-4;
      CHECK(ok);
    }
  }
}

TEST_CASE("first Adam step follows the bias-corrected closed form") {
  util::Rng rng(9);
  auto cfg = small_config(1, {});
  cfg.weight_decay = 0.0;
  auto model = disc::DiscriminatorModel::create(cfg, rng);
  model.set_flat_parameters({0.0, 0.0});
  // One example with the bit on and label 0: p = 0.5, so dL/dw = dL/db = 0.5.
  disc::Batch batch{{from_bits(1, {0}), 0}};
  const double loss = model.train_step(batch);
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(model.step_count() == 1);
  // Fresh Adam: m = (1-b1)g, v = (1-b2)g^2, mhat = g, vhat = g^2, so the
  // update is -lr * g / (|g| + eps) regardless of |g|: almost exactly -lr.
  const double g = 0.5;
  const double expected = -0.001 * g / (std::sqrt(g * g) + 1e-8);
  const auto params = model.flat_parameters();
  CHECK(params[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(params[1] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(params[0] - (-0.001)) < 1e-9);
}

TEST_CASE("zero-gradient batch moves weights only by the decay pull") {
  util::Rng rng(13);
  auto cfg = small_config(3, {});
  cfg.weight_decay = 0.01;
  auto model = disc::DiscriminatorModel::create(cfg, rng);
  model.set_flat_parameters({0.5, -0.25, 0.0, 0.0});
  // Empty feature, balanced labels at b = 0: the cross-entropy gradient of
  // every parameter is exactly zero, leaving the classic-L2 term alone.
  disc::Batch batch{{from_bits(3, {}), 0}, {from_bits(3, {}), 1}};
  CHECK(model.gradients(batch) == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  model.train_step(batch);
  const auto params = model.flat_parameters();
  const double lam = 0.01;
  const auto pull = [&](double w) { return w - 0.001 * lam * w / (std::abs(lam * w) + 1e-8); };
  CHECK(params[0] == doctest::Approx(pull(0.5)).epsilon(1e-12));
  CHECK(params[1] == doctest::Approx(pull(-0.25)).epsilon(1e-12));
  CHECK(params[2] == 0.0);  // zero weight: no decay force
  CHECK(params[3] == 0.0);  // bias is exempt from decay
  CHECK(std::abs(params[0] - 0.5) < 0.0011);
  CHECK(params[0] < 0.5);
  CHECK(params[1] > -0.25);
}

// Adam moves each parameter by at most about one learning rate per step, so
// the class patterns carry sixteen disjoint on-bits each: the margin grows
// sixteen weights at a time and clears the loss bar well inside 500 steps.
TEST_CASE("separable two-point problem trains below 0.05 in 500 steps") {
  util::Rng rng(21);
  auto model = disc::DiscriminatorModel::create(small_config(32, {}), rng);
  std::vector<int> lo_bits(16), hi_bits(16);
  for (int i = 0; i < 16; ++i) {
    lo_bits[static_cast<std::size_t>(i)] = i;
    hi_bits[static_cast<std::size_t>(i)] = 16 + i;
  }
  const auto lo = from_bits(32, lo_bits);
  const auto hi = from_bits(32, hi_bits);
  disc::Batch batch{{lo, 1}, {hi, 0}};
  for (int step = 0; step < 500; ++step) model.train_step(batch);
  CHECK(model.batch_loss(batch) < 0.05);
  CHECK(model.forward(lo) > 0.9);
  CHECK(model.forward(hi) < 0.1);
}

TEST_CASE("train_step rejects empty batches and reports the pre-update loss") {
  util::Rng rng(17);
  auto model = disc::DiscriminatorModel::create(small_config(4, {3}), rng);
  CHECK_THROWS_AS(model.train_step({}), std::invalid_argument);
  disc::Batch batch{{from_bits(4, {0}), 1}};
  const double before = model.batch_loss(batch);
  CHECK(model.train_step(batch) == before);
  CHECK(model.batch_loss(batch) < before);  // the step made progress
}

TEST_CASE("label conventions pick which side the reference scores high") {
  const auto ref_x = from_bits(20, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto pop_x = from_bits(20, {10, 11, 12, 13, 14, 15, 16, 17, 18, 19});
  const auto run = [&](disc::LabelConvention convention) {
    util::Rng init(31);
    auto model = disc::DiscriminatorModel::create(small_config(20, {}), init);
    std::vector<disc::FeatureVector> reference(20, ref_x);
    std::vector<disc::FeatureVector> population(20, pop_x);
    util::Rng shuffler(77);
    for (int gen = 0; gen < 50; ++gen)
      model.train_generation(reference, population, convention, shuffler);
    return std::pair<double, double>{model.forward(ref_x), model.forward(pop_x)};
  };
  const auto [ref_orig, pop_orig] = run(disc::LabelConvention::original);
  CHECK(ref_orig > 0.9);
  CHECK(pop_orig < 0.1);
  const auto [ref_flip, pop_flip] = run(disc::LabelConvention::flipped);
  CHECK(ref_flip < 0.1);
  CHECK(pop_flip > 0.9);
}

TEST_CASE("flipping labels mirrors the model around one half at step zero") {
  const auto zeroed = [] {
    util::Rng rng(19);
    auto cfg = small_config(4, {});
    cfg.weight_decay = 0.0;
    auto model = disc::DiscriminatorModel::create(cfg, rng);
    model.set_flat_parameters(std::vector<double>(5, 0.0));
    return model;
  };
  auto a = zeroed();
  auto b = zeroed();
  CHECK(a.forward(from_bits(4, {0, 2})) == 0.5);  // exact at the symmetric start

  disc::Batch batch{{from_bits(4, {0}), 1}, {from_bits(4, {1, 2}), 0}};
  disc::Batch flipped{{from_bits(4, {0}), 0}, {from_bits(4, {1, 2}), 1}};
  a.train_step(batch);
  b.train_step(flipped);
  const auto pa = a.flat_parameters();
  const auto pb = b.flat_parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == -pb[i]);
  for (const auto& x : {from_bits(4, {0}), from_bits(4, {1, 2}), from_bits(4, {3})})
    CHECK(b.forward(x) == doctest::Approx(1.0 - a.forward(x)).epsilon(1e-12));
}

TEST_CASE("population equal to the reference keeps loss near ln 2") {
  util::Rng init(23);
  auto model = disc::DiscriminatorModel::create(small_config(64, {8, 4}), init);
  util::Rng molrng(29);
  const auto sample = random_molecule_features(molrng, 30, 64);
  util::Rng shuffler(41);
  double loss = 0.0;
  for (int gen = 0; gen < 3; ++gen)
    loss = model.train_generation(sample, sample, disc::LabelConvention::original, shuffler);
  CHECK(std::abs(loss - std::log(2.0)) < 0.05);
}

// At learning rate 0.001 an Adam step moves a parameter by at most about
// 0.001, so the 40 steps of a single generation cannot build the logit
// margin this split needs; the separation lands within a few generations
// of continual training instead.
TEST_CASE("uniform sulfur chains separate from varied molecules under continual training") {
  util::Rng init(37);
  auto model = disc::DiscriminatorModel::create(small_config(2048, {100, 10}), init);
  util::Rng molrng(43);
  const auto reference = random_molecule_features(molrng, 500, 2048);
  const std::vector<disc::FeatureVector> population(
      500, disc::featurize(mol(std::string(60, 'S'))));
  util::Rng shuffler(47);
  double loss =
      model.train_generation(reference, population, disc::LabelConvention::original, shuffler);
  // One generation (10 epochs) already orders the classes correctly.
  CHECK(model.forward(population.front()) < model.forward(reference.front()));
  for (int gen = 0; gen < 4; ++gen)
    loss = model.train_generation(reference, population, disc::LabelConvention::original, shuffler);
  CHECK(loss < 0.1);
  CHECK(model.forward(population.front()) < 0.1);
  CHECK(model.forward(reference.front()) > 0.9);
}

TEST_CASE("checkpoints restore the model bit for bit") {
  util::Rng init(53);
  auto model = disc::DiscriminatorModel::create(small_config(16, {6, 3}), init);
  util::Rng batchrng(59);
  disc::Batch batch;
  for (int i = 0; i < 8; ++i) {
    std::vector<int> bits;
    for (int bit = 0; bit < 16; ++bit)
      if (util::uniform_unit(batchrng) < 0.3) bits.push_back(bit);
    batch.emplace_back(from_bits(16, std::move(bits)),
                       static_cast<int>(util::uniform_index(batchrng, 2)));
  }
  for (int step = 0; step < 7; ++step) model.train_step(batch);

  const std::string path = "disc_checkpoint_test.txt";
  model.save(path);
  auto restored = disc::DiscriminatorModel::load(path);
  CHECK(restored == model);
  CHECK(restored.step_count() == 7);

  // Optimizer state came back exactly, so further training stays identical.
  model.train_step(batch);
  restored.train_step(batch);
  CHECK(model.flat_parameters() == restored.flat_parameters());
  CHECK(restored == model);
  std::remove(path.c_str());

  CHECK_THROWS_AS(disc::DiscriminatorModel::load("no_such_checkpoint.txt"), std::runtime_error);
}

TEST_CASE("fixed seeds reproduce the whole training trajectory") {
  const auto run = [](unsigned long long seed) {
    util::Rng init(seed);
    auto model = disc::DiscriminatorModel::create(small_config(32, {8}), init);
    util::Rng molrng(seed + 1);
    const auto reference = random_molecule_features(molrng, 40, 32);
    const auto population = random_molecule_features(molrng, 40, 32);
    util::Rng shuffler(seed + 2);
    for (int gen = 0; gen < 3; ++gen)
      model.train_generation(reference, population, disc::LabelConvention::original, shuffler);
    return model;
  };
  const auto a = run(101);
  const auto b = run(101);
  CHECK(a == b);
  CHECK(a.flat_parameters() == b.flat_parameters());
  const auto c = run(202);
  CHECK_FALSE(a == c);
}
