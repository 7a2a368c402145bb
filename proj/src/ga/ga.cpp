#include "molga/ga/ga.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "molga/smiles/smiles.hpp"
#include "molga/util/hash.hpp"

namespace molga::ga {

namespace {

util::Rng derived_rng(std::uint64_t seed, std::string_view stream, std::uint64_t extra = 0) {
  return util::Rng(util::Fnv1a().u64(seed).str(stream).u64(extra).value());
}

disc::DiscriminatorConfig disc_config_for(DiscriminatorArch arch) {
  disc::DiscriminatorConfig cfg;
  cfg.hidden = arch == DiscriminatorArch::mlp ? std::vector<int>{100, 10} : std::vector<int>{};
  return cfg;
}

int best_index(const std::vector<Individual>& pop) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(pop.size()); ++i)
    if (pop[static_cast<std::size_t>(i)].fitness.total >
        pop[static_cast<std::size_t>(best)].fitness.total)
      best = i;
  return best;
}

// Elite slots in fitness order; ties keep the lower index first.
std::vector<int> top_indices(const std::vector<Individual>& pop, int count) {
  std::vector<int> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pop[static_cast<std::size_t>(a)].fitness.total >
           pop[static_cast<std::size_t>(b)].fitness.total;
  });
  order.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(order.size()))));
  return order;
}

double schedule_beta(const GAConfig& config, GAState& state) {
  const int next_gen = state.generation + 1;
  if (const auto* constant = std::get_if<ConstantSchedule>(&config.schedule))
    return constant->beta;
  if (const auto* time = std::get_if<TimeAdaptiveSchedule>(&config.schedule)) {
    if (state.hold_anchor.has_value()) {
      if (!state.max_fitness_history.empty() &&
          state.max_fitness_history.back() == *state.hold_anchor)
        return time->beta;
      state.hold_anchor.reset();
    }
    if (next_gen >= time->start_generation &&
        stagnation_triggered(state.max_fitness_history, time->patience)) {
      if (time->hold_until_change) state.hold_anchor = state.max_fitness_history.back();
      return time->beta;
    }
    return 0.0;
  }
  const auto& sim = std::get<SimilaritySchedule>(config.schedule);
  if (next_gen >= sim.start_generation &&
      similarity_triggered(state.best_history, sim.threshold, sim.window))
    return sim.beta;
  return 0.0;
}

void evaluate_population(std::vector<Individual>& pop, const GAConfig& config,
                         const RunContext& ctx, const disc::DiscriminatorModel* model,
                         double beta) {
  std::optional<fp::Fingerprint> target_fp;
  if (config.constraint.has_value()) target_fp = fp::morgan_fp(config.constraint->target);
  for (Individual& ind : pop) {
    if (config.constraint.has_value()) {
      ind.fitness = constrained_evaluate(ind.mol, *target_fp, config.constraint->delta,
                                         *ctx.provider, ctx.normalization);
    } else {
      ind.fitness = evaluate(ind.mol, *ctx.provider, ctx.normalization, model, beta);
    }
  }
}

GenerationStats compute_stats(const GAConfig& config, const std::vector<Individual>& pop,
                              int generation, double beta_used, bool model_active) {
  GenerationStats row;
  row.generation = generation;
  row.beta_used = beta_used;
  const auto n = static_cast<double>(pop.size());
  row.max_j = pop.front().fitness.J;
  double sum_j = 0.0, sum_heavy = 0.0, sum_d = 0.0;
  for (const Individual& ind : pop) {
    row.max_j = std::max(row.max_j, ind.fitness.J);
    sum_j += ind.fitness.J;
    sum_heavy += static_cast<double>(ind.mol.atom_count());
    if (ind.fitness.D.has_value()) sum_d += *ind.fitness.D;
  }
  row.mean_j = sum_j / n;
  row.mean_heavy_atoms = sum_heavy / n;
  row.mean_d = model_active ? sum_d / n : 0.0;
  const int best = best_index(pop);
  row.max_total = pop[static_cast<std::size_t>(best)].fitness.total;
  row.best_smiles = smiles::write_smiles(pop[static_cast<std::size_t>(best)].mol);

  std::vector<chem::MoleculeGraph> mols;
  mols.reserve(pop.size());
  for (const Individual& ind : pop) mols.push_back(ind.mol);
  row.fraction_unique = fp::fraction_unique(mols);

  // Seeded subsample keeps the diversity metric O(100^2) and reproducible
  // without touching the evolution RNG stream.
  util::Rng stats_rng = derived_rng(config.seed, "stats", static_cast<std::uint64_t>(generation));
  std::vector<fp::Fingerprint> fps;
  if (pop.size() > 100) {
    for (std::size_t i : util::sample_without_replacement(stats_rng, pop.size(), 100))
      fps.push_back(fp::morgan_fp(pop[i].mol));
  } else {
    for (const Individual& ind : pop) fps.push_back(fp::morgan_fp(ind.mol));
  }
  row.internal_diversity = fp::internal_diversity(fps);
  return row;
}

void finalize_generation(GAState& state, const GAConfig& config, const RunContext& ctx,
                         double beta_used) {
  const int best = best_index(state.population);
  const Individual& champion = state.population[static_cast<std::size_t>(best)];
  state.max_fitness_history.push_back(champion.fitness.total);
  state.best_history.push_back(champion.mol);

  // The archive tracks J (the schedule-independent objective), gated on
  // feasibility, so transient beta spikes cannot hijack the best-of-run.
  const auto archivable = [](const Individual& ind) {
    return ind.fitness.total != kInfeasibleTotal;
  };
  const Individual* best_j = nullptr;
  for (const Individual& ind : state.population)
    if (archivable(ind) && (best_j == nullptr || ind.fitness.J > best_j->fitness.J))
      best_j = &ind;
  if (best_j != nullptr &&
      (!state.best_assigned || best_j->fitness.J > state.best_of_run.fitness.J)) {
    state.best_of_run = *best_j;
    state.best_assigned = true;
  }

  if (ctx.on_generation) {
    ctx.on_generation(compute_stats(config, state.population, state.generation, beta_used,
                                    config.architecture != DiscriminatorArch::none));
  }
}

std::vector<disc::FeatureVector> featurize_all(const std::vector<Individual>& pop) {
  std::vector<disc::FeatureVector> out;
  out.reserve(pop.size());
  for (const Individual& ind : pop) out.push_back(disc::featurize(ind.mol));
  return out;
}

void train_discriminator(GAState& state, const GAConfig& config, const RunContext& ctx) {
  if (config.reinit_discriminator)
    state.model = disc::DiscriminatorModel::create(disc_config_for(config.architecture),
                                                   state.rng_disc);
  const std::size_t n = ctx.reference->size();
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(config.reference_sample_size));
  std::vector<disc::FeatureVector> reference;
  reference.reserve(k);
  for (std::size_t i : util::sample_without_replacement(state.rng_disc, n, k))
    reference.push_back(disc::featurize((*ctx.reference)[i]));
  state.model->train_generation(reference, featurize_all(state.population), config.convention,
                                state.rng_disc);
}

}  // namespace

void GAConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("population size must be at least 2");
  if (generations < 0) throw std::invalid_argument("generation count must be non-negative");
  if (elitism < 0 || elitism > population_size)
    throw std::invalid_argument("elitism must lie in [0, population size]");
  if (mutation.replace < 0 || mutation.insert < 0 || mutation.erase < 0 ||
      mutation.replace + mutation.insert + mutation.erase <= 0)
    throw std::invalid_argument("mutation weights must be non-negative with a positive sum");
  if (const auto* time = std::get_if<TimeAdaptiveSchedule>(&schedule)) {
    if (time->patience < 1) throw std::invalid_argument("stagnation patience must be at least 1");
    if (time->start_generation < 0)
      throw std::invalid_argument("schedule start generation must be non-negative");
  }
  if (const auto* sim = std::get_if<SimilaritySchedule>(&schedule)) {
    if (sim->window < 1) throw std::invalid_argument("similarity window must be at least 1");
    if (sim->start_generation < 0)
      throw std::invalid_argument("schedule start generation must be non-negative");
    if (sim->threshold < 0.0 || sim->threshold > 1.0)
      throw std::invalid_argument("similarity threshold must lie in [0, 1]");
  }
  if (constraint.has_value() && (constraint->delta < 0.0 || constraint->delta > 1.0))
    throw std::invalid_argument("constraint delta must lie in [0, 1]");
  if (reference_sample_size < 1)
    throw std::invalid_argument("reference sample size must be at least 1");
  if (seed_mode == SeedMode::constraint_target && !constraint.has_value())
    throw std::invalid_argument("constraint-target seeding requires a constraint");
}

descriptors::FitnessRecord evaluate(const chem::MoleculeGraph& mol,
                                    const descriptors::DescriptorProvider& provider,
                                    const descriptors::NormalizationParams& normalization,
                                    const disc::DiscriminatorModel* model, double beta) {
  descriptors::FitnessRecord rec = descriptors::penalized_logp(mol, provider, normalization);
  if (model != nullptr) rec.apply_discriminator(model->forward(disc::featurize(mol)), beta);
  return rec;
}

descriptors::FitnessRecord constrained_evaluate(const chem::MoleculeGraph& mol,
                                                const fp::Fingerprint& target_fp, double delta,
                                                const descriptors::DescriptorProvider& provider,
                                                const descriptors::NormalizationParams& normalization) {
  descriptors::FitnessRecord rec = descriptors::penalized_logp(mol, provider, normalization);
  const double similarity = fp::tanimoto(fp::morgan_fp(mol), target_fp);
  if (similarity < delta) rec.total = kInfeasibleTotal;
  return rec;
}

std::vector<int> select_parents(const std::vector<Individual>& pop, int count, util::Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("cannot select from an empty population");
  if (count <= 0) return {};
  const std::size_t n = pop.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pop[static_cast<std::size_t>(a)].fitness.total <
           pop[static_cast<std::size_t>(b)].fitness.total;
  });
  // Rank weights 1..n in sorted order; tied totals share their mean weight
  // so equal fitness means equal selection pressure.
  std::vector<double> cumulative(n);
  double running = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           pop[static_cast<std::size_t>(order[j + 1])].fitness.total ==
               pop[static_cast<std::size_t>(order[i])].fitness.total)
      ++j;
    const double weight = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      running += weight;
      cumulative[k] = running;
    }
    i = j + 1;
  }
  std::vector<int> parents;
  parents.reserve(static_cast<std::size_t>(count));
  for (int draw = 0; draw < count; ++draw) {
    const double u = util::uniform_real(rng, 0.0, running);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t pos = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), n - 1);
    parents.push_back(order[pos]);
  }
  return parents;
}

selfies::SelfiesString mutate(const selfies::SelfiesString& s, util::Rng& rng,
                              const selfies::Alphabet& alphabet, const MutationWeights& weights) {
  const int len = s.length();
  enum class Op { replace, insert, erase };
  const double total = weights.replace + weights.insert + weights.erase;
  const double r = util::uniform_real(rng, 0.0, total);
  Op op = Op::erase;
  if (r < weights.replace)
    op = Op::replace;
  else if (r < weights.replace + weights.insert)
    op = Op::insert;
  if (len == 0)
    op = Op::insert;
  else if (op == Op::erase && len == 1)
    op = Op::replace;

  std::vector<int> indices = s.indices();
  switch (op) {
    case Op::replace: {
      const auto pos = static_cast<std::size_t>(util::uniform_index(rng, len));
      indices[pos] = static_cast<int>(util::uniform_index(rng, alphabet.size()));
      break;
    }
    case Op::insert: {
      const auto pos = static_cast<std::size_t>(util::uniform_index(rng, len + 1));
      indices.insert(indices.begin() + static_cast<std::ptrdiff_t>(pos),
                     static_cast<int>(util::uniform_index(rng, alphabet.size())));
      if (indices.size() > static_cast<std::size_t>(alphabet.max_length()))
        indices.resize(static_cast<std::size_t>(alphabet.max_length()));
      break;
    }
    case Op::erase: {
      const auto pos = static_cast<std::size_t>(util::uniform_index(rng, len));
      indices.erase(indices.begin() + static_cast<std::ptrdiff_t>(pos));
      break;
    }
  }
  return selfies::SelfiesString::from_indices(std::move(indices), alphabet);
}

bool stagnation_triggered(const std::vector<double>& history, int patience) {
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (history.size() < static_cast<std::size_t>(patience)) return false;
  const double anchor = history.back();
  for (std::size_t i = history.size() - static_cast<std::size_t>(patience); i < history.size(); ++i)
    if (history[i] != anchor) return false;
  return true;
}

double window_similarity(const std::vector<chem::MoleculeGraph>& best_history, int window) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  const std::size_t take = std::min<std::size_t>(best_history.size(),
                                                 static_cast<std::size_t>(window));
  if (take < 2) return 0.0;
  std::vector<fp::Fingerprint> fps;
  fps.reserve(take);
  for (std::size_t i = best_history.size() - take; i < best_history.size(); ++i)
    fps.push_back(fp::morgan_fp(best_history[i]));
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < fps.size(); ++a)
    for (std::size_t b = a + 1; b < fps.size(); ++b) {
      sum += fp::tanimoto(fps[a], fps[b]);
      ++pairs;
    }
  return sum / pairs;
}

bool similarity_triggered(const std::vector<chem::MoleculeGraph>& best_history, double threshold,
                          int window) {
  if (best_history.size() < static_cast<std::size_t>(window)) return false;
  return window_similarity(best_history, window) > threshold;
}

GAState init_state(const GAConfig& config, const RunContext& ctx) {
  config.validate();
  if (ctx.alphabet == nullptr || ctx.provider == nullptr)
    throw std::invalid_argument("run context needs an alphabet and a descriptor provider");
  const bool needs_reference = config.architecture != DiscriminatorArch::none ||
                               config.seed_mode == SeedMode::dataset_top;
  if (needs_reference && (ctx.reference == nullptr || ctx.reference->empty()))
    throw std::invalid_argument("run context needs a non-empty reference dataset");

  GAState state;
  state.rng_evolution = util::Rng(config.seed);
  state.rng_disc = derived_rng(config.seed, "disc");
  if (config.architecture != DiscriminatorArch::none)
    state.model = disc::DiscriminatorModel::create(disc_config_for(config.architecture),
                                                   state.rng_disc);

  std::vector<selfies::SelfiesString> genomes;
  switch (config.seed_mode) {
    case SeedMode::methane: {
      genomes.assign(static_cast<std::size_t>(config.population_size),
                     selfies::SelfiesString::parse("[C]", *ctx.alphabet));
      break;
    }
    case SeedMode::dataset_top: {
      std::vector<std::pair<double, std::size_t>> scored;
      scored.reserve(ctx.reference->size());
      for (std::size_t i = 0; i < ctx.reference->size(); ++i) {
        const auto rec =
            descriptors::penalized_logp((*ctx.reference)[i], *ctx.provider, ctx.normalization);
        scored.emplace_back(rec.J, i);
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (const auto& [j, idx] : scored) {
        if (static_cast<int>(genomes.size()) == config.population_size) break;
        try {
          genomes.push_back(selfies::encode((*ctx.reference)[idx], *ctx.alphabet));
        } catch (const std::runtime_error&) {
          // molecule not expressible in this alphabet; take the next one
        }
      }
      if (genomes.empty())
        throw std::invalid_argument("no reference molecule is expressible in the alphabet");
      for (std::size_t i = genomes.size();
           i < static_cast<std::size_t>(config.population_size); ++i)
        genomes.push_back(genomes[i % genomes.size()]);
      break;
    }
    case SeedMode::constraint_target: {
      genomes.assign(static_cast<std::size_t>(config.population_size),
                     selfies::encode(config.constraint->target, *ctx.alphabet));
      break;
    }
  }

  state.population.reserve(genomes.size());
  for (auto& genome : genomes) {
    Individual ind;
    ind.mol = selfies::decode(genome, *ctx.alphabet);
    ind.genome = std::move(genome);
    state.population.push_back(std::move(ind));
  }

  const double beta0 = std::holds_alternative<ConstantSchedule>(config.schedule)
                           ? std::get<ConstantSchedule>(config.schedule).beta
                           : 0.0;
  evaluate_population(state.population, config, ctx,
                      state.model.has_value() ? &*state.model : nullptr, beta0);
  finalize_generation(state, config, ctx, beta0);
  return state;
}

void step_generation(GAState& state, const GAConfig& config, const RunContext& ctx) {
  const double beta_used = schedule_beta(config, state);

  std::vector<Individual> next;
  next.reserve(static_cast<std::size_t>(config.population_size));
  for (int idx : top_indices(state.population, config.elitism))
    next.push_back(state.population[static_cast<std::size_t>(idx)]);
  const int offspring = config.population_size - static_cast<int>(next.size());
  for (int parent : select_parents(state.population, offspring, state.rng_evolution)) {
    Individual child;
    child.genome = mutate(state.population[static_cast<std::size_t>(parent)].genome,
                          state.rng_evolution, *ctx.alphabet, config.mutation);
    child.mol = selfies::decode(child.genome, *ctx.alphabet);
    next.push_back(std::move(child));
  }
  state.population = std::move(next);
  state.generation += 1;

  if (state.model.has_value() && beta_used != 0.0) train_discriminator(state, config, ctx);
  evaluate_population(state.population, config, ctx,
                      state.model.has_value() ? &*state.model : nullptr, beta_used);
  finalize_generation(state, config, ctx, beta_used);
}

Trajectory run(const GAConfig& config, const RunContext& ctx) {
  Trajectory trajectory;
  RunContext wired = ctx;
  wired.on_generation = [&](const GenerationStats& row) {
    trajectory.rows.push_back(row);
    if (ctx.on_generation) ctx.on_generation(row);
  };
  GAState state = init_state(config, wired);
  for (int gen = 0; gen < config.generations; ++gen) step_generation(state, config, wired);
  trajectory.final_population = std::move(state.population);
  trajectory.best = std::move(state.best_of_run);
  return trajectory;
}

std::string stats_csv_header() {
  return "generation,max_J,mean_J,max_total,beta_used,internal_diversity,fraction_unique,"
         "mean_heavy_atoms,mean_D,best_smiles";
}

std::string stats_csv_row(const GenerationStats& row) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", row.generation,
                row.max_j, row.mean_j, row.max_total, row.beta_used, row.internal_diversity,
                row.fraction_unique, row.mean_heavy_atoms, row.mean_d);
  return std::string(buf) + row.best_smiles;
}

std::vector<std::size_t> pareto_front(const std::vector<Point2>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x > points[b].x;
    return points[a].y > points[b].y;
  });
  std::vector<std::size_t> kept;
  double best_y = -std::numeric_limits<double>::infinity();
  bool have_kept = false;
  Point2 last_kept{};
  for (std::size_t idx : order) {
    const Point2& p = points[idx];
    // Strictly higher y than everything with x >= p.x survives; exact
    // duplicates of a surviving point are mutually non-dominated and stay.
    if (p.y > best_y || (have_kept && p.x == last_kept.x && p.y == last_kept.y)) {
      kept.push_back(idx);
      best_y = std::max(best_y, p.y);
      have_kept = true;
      last_kept = p;
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

double hypervolume_2d(const std::vector<Point2>& front, Point2 nadir) {
  for (const Point2& p : front)
    if (!(p.x > nadir.x && p.y > nadir.y))
      throw std::invalid_argument("every front point must strictly dominate the nadir");
  std::vector<std::size_t> order(front.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (front[a].x != front[b].x) return front[a].x > front[b].x;
    return front[a].y > front[b].y;
  });
  double area = 0.0;
  double max_y = nadir.y;
  for (std::size_t idx : order) {
    const Point2& p = front[idx];
    if (p.y > max_y) {
      area += (p.x - nadir.x) * (p.y - max_y);
      max_y = p.y;
    }
  }
  return area;
}

}  // namespace molga::ga
