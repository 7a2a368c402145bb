#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "molga/exp/experiments.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/util/rng.hpp"

namespace molga::exp {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::baseline: return "baseline";
    case ExperimentKind::evolve: return "evolve";
    case ExperimentKind::constrained: return "constrained";
    case ExperimentKind::pareto: return "pareto";
    case ExperimentKind::rediscovery: return "rediscovery";
    case ExperimentKind::similarity_task: return "similarity-task";
  }
  throw std::logic_error("unreachable experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const ExperimentKind k :
       {ExperimentKind::baseline, ExperimentKind::evolve, ExperimentKind::constrained,
        ExperimentKind::pareto, ExperimentKind::rediscovery, ExperimentKind::similarity_task}) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown experiment kind: " + name);
}

Environment load_environment(const ExperimentSpec& spec) {
  Environment env{
      spec.alphabet_path.empty() ? selfies::Alphabet::builtin_default()
                                 : selfies::Alphabet::load(spec.alphabet_path),
      descriptors::BuiltinDescriptors{descriptors::FragmentTable::load(spec.table_path)},
      descriptors::NormalizationParams{},
      smiles::load_dataset(spec.dataset_path),
      {}};
  env.normalization.validate();
  env.reference.reserve(env.dataset.entries.size());
  for (const auto& entry : env.dataset.entries) env.reference.push_back(entry.mol);
  return env;
}

std::string resolve_out_dir(const std::string& base, std::uint64_t seed, bool overwrite) {
  if (base.empty()) throw std::invalid_argument("output directory must not be empty");
  if (overwrite) {
    fs::create_directories(base);
    return base;
  }
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string want = base + "-" + stamp + "-seed" + std::to_string(seed);
  std::string dir = want;
  for (int k = 2; fs::exists(dir); ++k) dir = want + "-" + std::to_string(k);
  fs::create_directories(dir);
  return dir;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Runs fn(0..tasks-1) over `jobs` workers. Returns one error message per
// task, empty on success; scheduling never affects what a task computes.
std::vector<std::string> run_parallel(int jobs, int tasks, const std::function<void(int)>& fn) {
  std::vector<std::string> errors(static_cast<std::size_t>(tasks));
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = "unknown error";
    }
  };
  if (jobs <= 1 || tasks <= 1) {
    for (int i = 0; i < tasks; ++i) guarded(i);
    return errors;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, tasks);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) guarded(i);
    });
  }
  for (auto& t : pool) t.join();
  return errors;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_csv(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

struct MetricColumn {
  const char* name;
  double ga::GenerationStats::*field;
};

constexpr MetricColumn kTrajectoryMetrics[] = {
    {"max_J", &ga::GenerationStats::max_j},
    {"mean_J", &ga::GenerationStats::mean_j},
    {"max_total", &ga::GenerationStats::max_total},
    {"beta_used", &ga::GenerationStats::beta_used},
    {"internal_diversity", &ga::GenerationStats::internal_diversity},
    {"fraction_unique", &ga::GenerationStats::fraction_unique},
    {"mean_heavy_atoms", &ga::GenerationStats::mean_heavy_atoms},
    {"mean_D", &ga::GenerationStats::mean_d},
};

// Fitness on a similarity objective: logp_norm carries twice the Tanimoto
// similarity to the target and the SA term cancels at its mean, so
// J = 2*T(mol, target) - ring_norm(mol).
class SimilarityObjective final : public descriptors::DescriptorProvider {
 public:
  SimilarityObjective(const descriptors::NormalizationParams& norm, fp::Fingerprint target)
      : norm_(norm), target_(std::move(target)) {}

  double logp(const chem::MoleculeGraph& mol) const override {
    const double t = fp::tanimoto(fp::morgan_fp(mol, 2, 2048), target_);
    return norm_.logp.mean + norm_.logp.std * 2.0 * t;
  }
  double sa(const chem::MoleculeGraph&) const override { return norm_.sa.mean; }

 private:
  descriptors::NormalizationParams norm_;
  fp::Fingerprint target_;
};

int best_dataset_index(const Environment& env) {
  int best = 0;
  double best_j = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < env.reference.size(); ++i) {
    const double j =
        descriptors::penalized_logp(env.reference[i], env.provider, env.normalization).J;
    if (j > best_j) {
      best_j = j;
      best = static_cast<int>(i);
    }
  }
  return best;
}

json failure_report(const std::vector<std::string>& errors) {
  json failures = json::array();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) failures.push_back({{"task", i}, {"error", errors[i]}});
  }
  return failures;
}

}  // namespace

int cmd_baseline(const ExperimentSpec& spec) {
  const Environment env = load_environment(spec);
  util::Rng rng(spec.config.seed);

  auto samples = open_csv(spec.out_dir + "/samples.csv");
  std::fprintf(samples.get(), "index,J,smiles\n");
  std::vector<double> js;
  js.reserve(static_cast<std::size_t>(spec.baseline_samples));
  double best_j = -std::numeric_limits<double>::infinity();
  std::string best_smiles;
  for (int i = 0; i < spec.baseline_samples; ++i) {
    const auto genome = selfies::random_selfies(rng, spec.sample_length, env.alphabet);
    const auto mol = selfies::decode(genome, env.alphabet);
    const auto record = descriptors::penalized_logp(mol, env.provider, env.normalization);
    js.push_back(record.J);
    const std::string smi = smiles::write_smiles(mol);
    if (record.J > best_j) {
      best_j = record.J;
      best_smiles = smi;
    }
    std::fprintf(samples.get(), "%d,%s,%s\n", i, fmt(record.J).c_str(), smi.c_str());
  }

  double dataset_best = -std::numeric_limits<double>::infinity();
  std::string dataset_best_smiles;
  for (const auto& entry : env.dataset.entries) {
    const double j = descriptors::penalized_logp(entry.mol, env.provider, env.normalization).J;
    if (j > dataset_best) {
      dataset_best = j;
      dataset_best_smiles = entry.smiles;
    }
  }

  const Moments m = moments(js);
  write_json(spec.out_dir + "/summary.json",
             json{{"experiment", kind_name(spec.kind)},
                  {"samples", spec.baseline_samples},
                  {"sample_length", spec.sample_length},
                  {"mean_J", m.mean},
                  {"std_J", m.std},
                  {"max_J", best_j},
                  {"best_smiles", best_smiles},
                  {"dataset_best_J", dataset_best},
                  {"dataset_best_smiles", dataset_best_smiles}});
  return 0;
}

int cmd_evolve(const ExperimentSpec& spec) {
  const Environment env = load_environment(spec);

  const bool is_task =
      spec.kind == ExperimentKind::rediscovery || spec.kind == ExperimentKind::similarity_task;
  std::optional<chem::MoleculeGraph> task_target;
  std::optional<fp::Fingerprint> task_fp;
  std::optional<SimilarityObjective> task_provider;
  if (is_task) {
    task_target = spec.task_target.empty()
                      ? env.reference[static_cast<std::size_t>(best_dataset_index(env))]
                      : smiles::parse_smiles(spec.task_target);
    task_fp = fp::morgan_fp(*task_target, 2, 2048);
    task_provider.emplace(env.normalization, *task_fp);
  }
  const descriptors::DescriptorProvider& provider =
      is_task ? static_cast<const descriptors::DescriptorProvider&>(*task_provider) : env.provider;

  const int n = std::max(1, spec.repeats);
  std::vector<std::optional<ga::Trajectory>> runs(static_cast<std::size_t>(n));
  const auto errors = run_parallel(spec.jobs, n, [&](int i) {
    ga::GAConfig cfg = spec.config;
    cfg.seed = spec.config.seed + static_cast<std::uint64_t>(i);
    const std::string path =
        spec.out_dir + "/trajectory_seed" + std::to_string(cfg.seed) + ".csv";
    auto file = open_csv(path);
    std::fprintf(file.get(), "%s\n", ga::stats_csv_header().c_str());
    ga::RunContext ctx;
    ctx.alphabet = &env.alphabet;
    ctx.provider = &provider;
    ctx.normalization = env.normalization;
    ctx.reference = &env.reference;
    ctx.on_generation = [&](const ga::GenerationStats& row) {
      std::fprintf(file.get(), "%s\n", ga::stats_csv_row(row).c_str());
      std::fflush(file.get());
    };
    runs[static_cast<std::size_t>(i)] = ga::run(cfg, ctx);
  });

  // Aggregate across the seeds that completed: per-generation mean and std
  // of every numeric trajectory column.
  std::vector<const ga::Trajectory*> done;
  for (const auto& r : runs) {
    if (r) done.push_back(&*r);
  }
  if (!done.empty()) {
    auto agg = open_csv(spec.out_dir + "/aggregate.csv");
    std::fprintf(agg.get(), "generation");
    for (const auto& metric : kTrajectoryMetrics) {
      std::fprintf(agg.get(), ",%s_mean,%s_std", metric.name, metric.name);
    }
    std::fprintf(agg.get(), "\n");
    const std::size_t rows = done.front()->rows.size();
    for (std::size_t g = 0; g < rows; ++g) {
      std::fprintf(agg.get(), "%d", done.front()->rows[g].generation);
      for (const auto& metric : kTrajectoryMetrics) {
        std::vector<double> xs;
        xs.reserve(done.size());
        for (const ga::Trajectory* t : done) xs.push_back(t->rows[g].*(metric.field));
        const Moments m = moments(xs);
        std::fprintf(agg.get(), ",%s,%s", fmt(m.mean).c_str(), fmt(m.std).c_str());
      }
      std::fprintf(agg.get(), "\n");
    }
  }

  json seeds = json::array();
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = spec.config.seed + static_cast<std::uint64_t>(i);
    json entry{{"seed", seed}, {"completed", runs[static_cast<std::size_t>(i)].has_value()}};
    if (const auto& r = runs[static_cast<std::size_t>(i)]) {
      entry["final_max_J"] = r->rows.back().max_j;
      entry["best_J"] = r->best.fitness.J;
      entry["best_smiles"] = smiles::write_smiles(r->best.mol);
      if (is_task) {
        const double sim = fp::tanimoto(fp::morgan_fp(r->best.mol, 2, 2048), *task_fp);
        entry["best_similarity"] = sim;
        entry["rediscovered"] =
            chem::canonical_key(r->best.mol) == chem::canonical_key(*task_target);
      }
    }
    seeds.push_back(std::move(entry));
  }
  json summary{{"experiment", kind_name(spec.kind)},
               {"repeats", n},
               {"completed", static_cast<int>(done.size())},
               {"seeds", std::move(seeds)}};
  if (is_task) summary["task_target"] = smiles::write_smiles(*task_target);
  summary["failures"] = failure_report(errors);
  write_json(spec.out_dir + "/summary.json", summary);

  return static_cast<int>(done.size()) == n ? 0 : 1;
}

int cmd_constrained(const ExperimentSpec& spec) {
  const Environment env = load_environment(spec);

  std::vector<std::pair<double, int>> scored;  // (J, dataset index)
  scored.reserve(env.reference.size());
  for (std::size_t i = 0; i < env.reference.size(); ++i) {
    scored.emplace_back(
        descriptors::penalized_logp(env.reference[i], env.provider, env.normalization).J,
        static_cast<int>(i));
  }
  std::sort(scored.begin(), scored.end());
  const int k = std::min<int>(spec.constrained_targets, static_cast<int>(scored.size()));
  const int repeats = std::max(1, spec.repeats);
  const int tasks = k * repeats;

  struct Row {
    int target = 0;
    std::string target_smiles;
    double target_j = 0.0;
    std::uint64_t seed = 0;
    std::string best_smiles;
    double best_j = 0.0;
    double similarity = 0.0;
    double improvement = 0.0;
    bool success = false;
    bool done = false;
  };
  std::vector<Row> rows(static_cast<std::size_t>(tasks));

  const auto errors = run_parallel(spec.jobs, tasks, [&](int t) {
    const int which = t / repeats;
    const int dataset_index = scored[static_cast<std::size_t>(which)].second;
    const double target_j = scored[static_cast<std::size_t>(which)].first;
    const chem::MoleculeGraph& target = env.reference[static_cast<std::size_t>(dataset_index)];

    ga::GAConfig cfg = spec.config;
    cfg.seed = spec.config.seed + static_cast<std::uint64_t>(t);
    cfg.seed_mode = ga::SeedMode::constraint_target;
    cfg.constraint = ga::Constraint{target, spec.constrained_delta};

    ga::RunContext ctx;
    ctx.alphabet = &env.alphabet;
    ctx.provider = &env.provider;
    ctx.normalization = env.normalization;
    ctx.reference = &env.reference;
    const ga::Trajectory result = ga::run(cfg, ctx);

    Row& row = rows[static_cast<std::size_t>(t)];
    row.target = which;
    row.target_smiles = env.dataset.entries[static_cast<std::size_t>(dataset_index)].smiles;
    row.target_j = target_j;
    row.seed = cfg.seed;
    row.best_smiles = smiles::write_smiles(result.best.mol);
    row.best_j = result.best.fitness.J;
    row.similarity =
        fp::tanimoto(fp::morgan_fp(result.best.mol, 2, 2048), fp::morgan_fp(target, 2, 2048));
    row.improvement = row.best_j - target_j;
    row.success = row.improvement > 0.0;
    row.done = true;
  });

  auto out = open_csv(spec.out_dir + "/results.csv");
  std::fprintf(out.get(),
               "target,target_smiles,target_J,seed,best_smiles,best_J,similarity,improvement,"
               "success\n");
  int successes = 0, completed = 0;
  double improvement_sum = 0.0;
  for (const Row& row : rows) {
    if (!row.done) continue;
    ++completed;
    successes += row.success ? 1 : 0;
    improvement_sum += row.improvement;
    std::fprintf(out.get(), "%d,%s,%s,%llu,%s,%s,%s,%s,%d\n", row.target,
                 row.target_smiles.c_str(), fmt(row.target_j).c_str(),
                 static_cast<unsigned long long>(row.seed), row.best_smiles.c_str(),
                 fmt(row.best_j).c_str(), fmt(row.similarity).c_str(),
                 fmt(row.improvement).c_str(), row.success ? 1 : 0);
  }

  write_json(
      spec.out_dir + "/summary.json",
      json{{"experiment", kind_name(spec.kind)},
           {"targets", k},
           {"repeats", repeats},
           {"delta", spec.constrained_delta},
           {"completed", completed},
           {"success_rate", completed > 0 ? static_cast<double>(successes) / completed : 0.0},
           {"mean_improvement", completed > 0 ? improvement_sum / completed : 0.0},
           {"failures", failure_report(errors)}});
  return completed == tasks ? 0 : 1;
}

int cmd_pareto(const ExperimentSpec& spec) {
  const Environment env = load_environment(spec);
  const auto second = [&](const chem::MoleculeGraph& mol) {
    return spec.config.second_objective ? spec.config.second_objective(mol)
                                        : -static_cast<double>(chem::heavy_atom_count(mol));
  };

  const int n = std::max(1, spec.repeats);
  std::vector<std::optional<ga::Trajectory>> runs(static_cast<std::size_t>(n));
  const auto errors = run_parallel(spec.jobs, n, [&](int i) {
    ga::GAConfig cfg = spec.config;
    cfg.seed = spec.config.seed + static_cast<std::uint64_t>(i);
    const std::string path =
        spec.out_dir + "/trajectory_seed" + std::to_string(cfg.seed) + ".csv";
    auto file = open_csv(path);
    std::fprintf(file.get(), "%s\n", ga::stats_csv_header().c_str());
    ga::RunContext ctx;
    ctx.alphabet = &env.alphabet;
    ctx.provider = &env.provider;
    ctx.normalization = env.normalization;
    ctx.reference = &env.reference;
    ctx.on_generation = [&](const ga::GenerationStats& row) {
      std::fprintf(file.get(), "%s\n", ga::stats_csv_row(row).c_str());
      std::fflush(file.get());
    };
    runs[static_cast<std::size_t>(i)] = ga::run(cfg, ctx);
  });

  struct Labeled {
    std::string set;
    std::string smiles;
    ga::Point2 point;
  };
  std::vector<Labeled> points;
  for (std::size_t i = 0; i < env.reference.size(); ++i) {
    const auto& mol = env.reference[i];
    points.push_back({"dataset", env.dataset.entries[i].smiles,
                      {descriptors::penalized_logp(mol, env.provider, env.normalization).J,
                       second(mol)}});
  }
  const std::size_t dataset_count = points.size();
  for (const auto& r : runs) {
    if (!r) continue;
    for (const auto& ind : r->final_population) {
      points.push_back({"ga", smiles::write_smiles(ind.mol), {ind.fitness.J, second(ind.mol)}});
    }
    points.push_back(
        {"ga", smiles::write_smiles(r->best.mol), {r->best.fitness.J, second(r->best.mol)}});
  }

  std::vector<ga::Point2> dataset_points, ga_points;
  for (std::size_t i = 0; i < points.size(); ++i) {
    (i < dataset_count ? dataset_points : ga_points).push_back(points[i].point);
  }

  // Shared nadir: strictly below the union minima, so both hypervolumes are
  // measured against the same reference corner and stay well-defined even
  // when a front touches a coordinate minimum.
  ga::Point2 nadir{std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    nadir.x = std::min(nadir.x, p.point.x);
    nadir.y = std::min(nadir.y, p.point.y);
  }
  nadir.x -= 1e-9 * (1.0 + std::abs(nadir.x));
  nadir.y -= 1e-9 * (1.0 + std::abs(nadir.y));

  const auto front_of = [](const std::vector<ga::Point2>& pts) {
    return ga::pareto_front(pts);
  };
  const auto dataset_front = front_of(dataset_points);
  double hv_dataset = 0.0, hv_ga = 0.0;
  std::vector<std::size_t> ga_front;
  {
    std::vector<ga::Point2> front_pts;
    for (const std::size_t i : dataset_front) front_pts.push_back(dataset_points[i]);
    hv_dataset = front_pts.empty() ? 0.0 : ga::hypervolume_2d(front_pts, nadir);
  }
  if (!ga_points.empty()) {
    ga_front = front_of(ga_points);
    std::vector<ga::Point2> front_pts;
    for (const std::size_t i : ga_front) front_pts.push_back(ga_points[i]);
    hv_ga = front_pts.empty() ? 0.0 : ga::hypervolume_2d(front_pts, nadir);
  }

  std::set<std::size_t> on_front;
  for (const std::size_t i : dataset_front) on_front.insert(i);
  for (const std::size_t i : ga_front) on_front.insert(dataset_count + i);

  auto out = open_csv(spec.out_dir + "/pareto_points.csv");
  std::fprintf(out.get(), "set,smiles,J,objective2,on_front\n");
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::fprintf(out.get(), "%s,%s,%s,%s,%d\n", points[i].set.c_str(), points[i].smiles.c_str(),
                 fmt(points[i].point.x).c_str(), fmt(points[i].point.y).c_str(),
                 on_front.count(i) ? 1 : 0);
  }

  int completed = 0;
  for (const auto& r : runs) completed += r ? 1 : 0;
  write_json(spec.out_dir + "/summary.json",
             json{{"experiment", kind_name(spec.kind)},
                  {"repeats", n},
                  {"completed", completed},
                  {"nadir_J", nadir.x},
                  {"nadir_objective2", nadir.y},
                  {"hypervolume_dataset", hv_dataset},
                  {"hypervolume_ga", hv_ga},
                  {"front_size_dataset", dataset_front.size()},
                  {"front_size_ga", ga_front.size()},
                  {"failures", failure_report(errors)}});
  return completed == n ? 0 : 1;
}

namespace {

// Minimal key=value reader for config.resolved files (quoted values allowed).
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || line[0] == '[' || eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\"");
      const auto b = s.find_last_not_of(" \t\"");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

struct TrajectoryFile {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> rows;  // parsed data lines
  std::vector<std::string> header;
};

std::vector<TrajectoryFile> load_trajectories(const std::string& dir) {
  std::vector<TrajectoryFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trajectory_seed", 0) != 0 || entry.path().extension() != ".csv") continue;
    TrajectoryFile tf;
    tf.seed = std::stoull(name.substr(std::strlen("trajectory_seed")));
    std::ifstream in(entry.path());
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (first) {
        tf.header = split_csv_line(line);
        first = false;
      } else {
        tf.rows.push_back(split_csv_line(line));
      }
    }
    files.push_back(std::move(tf));
  }
  std::sort(files.begin(), files.end(),
            [](const TrajectoryFile& a, const TrajectoryFile& b) { return a.seed < b.seed; });
  return files;
}

// Long-form (metric,generation,seed,value) rows for every per-generation
// trajectory in the run; metric columns are matched by header name.
json write_trajectory_tidy(const std::string& run_dir, const std::string& report_dir) {
  const auto files = load_trajectories(run_dir);
  auto tidy = open_csv(report_dir + "/tidy.csv");
  std::fprintf(tidy.get(), "metric,generation,seed,value\n");
  json metrics = json::array();
  for (const auto& metric : kTrajectoryMetrics) metrics.push_back(metric.name);
  for (const auto& tf : files) {
    for (const auto& row : tf.rows) {
      for (const auto& metric : kTrajectoryMetrics) {
        const auto it = std::find(tf.header.begin(), tf.header.end(), metric.name);
        if (it == tf.header.end()) continue;
        const auto col = static_cast<std::size_t>(it - tf.header.begin());
        std::fprintf(tidy.get(), "%s,%s,%llu,%s\n", metric.name, row[0].c_str(),
                     static_cast<unsigned long long>(tf.seed), row[col].c_str());
      }
    }
  }
  return json{{"metrics", std::move(metrics)}, {"seeds", files.size()}};
}

}  // namespace

int cmd_report(const std::string& run_dir) {
  const std::string config_path = run_dir + "/config.resolved";
  std::vector<std::string> missing;
  if (!fs::exists(config_path)) missing.push_back("config.resolved");

  std::string kind_text;
  if (missing.empty()) {
    const auto config = read_config_file(config_path);
    const auto it = config.find("experiment");
    if (it == config.end()) {
      std::fprintf(stderr, "config.resolved lacks an experiment entry\n");
      return 1;
    }
    kind_text = it->second;
  }

  std::vector<std::string> required;
  if (kind_text == "baseline") {
    required = {"samples.csv", "summary.json"};
  } else if (kind_text == "constrained") {
    required = {"results.csv", "summary.json"};
  } else if (kind_text == "pareto") {
    required = {"pareto_points.csv", "summary.json"};
  } else {  // evolve and the goal-directed task kinds
    required = {"aggregate.csv", "summary.json"};
  }
  for (const auto& name : required) {
    if (!fs::exists(run_dir + "/" + name)) missing.push_back(name);
  }
  bool needs_trajectories =
      kind_text.empty() || kind_text == "evolve" || kind_text == "rediscovery" ||
      kind_text == "similarity-task";
  if (!missing.empty() ||
      (needs_trajectories && fs::exists(run_dir) && load_trajectories(run_dir).empty())) {
    if (needs_trajectories && missing.empty()) missing.push_back("trajectory_seed*.csv");
    std::fprintf(stderr, "run directory %s is missing required files:\n", run_dir.c_str());
    for (const auto& name : missing) std::fprintf(stderr, "  %s\n", name.c_str());
    return 1;
  }

  const std::string report_dir = run_dir + "/report";
  fs::create_directories(report_dir);
  json manifest{{"experiment", kind_text}, {"source", run_dir}};
  json outputs = json::array();

  if (kind_text == "baseline") {
    const auto config = read_config_file(config_path);
    const std::string seed = config.count("seed") ? config.at("seed") : "0";
    std::ifstream in(run_dir + "/samples.csv");
    std::string line;
    std::getline(in, line);  // header
    auto tidy = open_csv(report_dir + "/tidy.csv");
    std::fprintf(tidy.get(), "metric,generation,seed,value\n");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      std::fprintf(tidy.get(), "J,%s,%s,%s\n", fields[0].c_str(), seed.c_str(),
                   fields[1].c_str());
    }
    outputs.push_back("report/tidy.csv");
    manifest["metrics"] = {"J"};
  } else if (kind_text == "constrained") {
    std::ifstream in(run_dir + "/results.csv");
    std::string line;
    std::getline(in, line);
    auto tidy = open_csv(report_dir + "/tidy.csv");
    std::fprintf(tidy.get(), "metric,generation,seed,value\n");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      // columns: target,target_smiles,target_J,seed,best_smiles,best_J,similarity,improvement,success
      std::fprintf(tidy.get(), "improvement,%s,%s,%s\n", f[0].c_str(), f[3].c_str(),
                   f[7].c_str());
      std::fprintf(tidy.get(), "similarity,%s,%s,%s\n", f[0].c_str(), f[3].c_str(), f[6].c_str());
      std::fprintf(tidy.get(), "success,%s,%s,%s\n", f[0].c_str(), f[3].c_str(), f[8].c_str());
    }
    outputs.push_back("report/tidy.csv");
    manifest["metrics"] = {"improvement", "similarity", "success"};
    manifest["generation_column"] = "target index";
  } else if (kind_text == "pareto") {
    std::ifstream in(run_dir + "/pareto_points.csv");
    std::string line;
    std::getline(in, line);
    auto front = open_csv(report_dir + "/front.csv");
    std::fprintf(front.get(), "set,smiles,J,objective2\n");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f[4] == "1") {
        std::fprintf(front.get(), "%s,%s,%s,%s\n", f[0].c_str(), f[1].c_str(), f[2].c_str(),
                     f[3].c_str());
      }
    }
    outputs.push_back("report/front.csv");
    std::ifstream sj(run_dir + "/summary.json");
    const json summary = json::parse(sj);
    manifest["hypervolume_dataset"] = summary.at("hypervolume_dataset");
    manifest["hypervolume_ga"] = summary.at("hypervolume_ga");
    manifest["nadir"] = {summary.at("nadir_J"), summary.at("nadir_objective2")};
    if (!load_trajectories(run_dir).empty()) {
      manifest.update(write_trajectory_tidy(run_dir, report_dir));
      outputs.push_back("report/tidy.csv");
    }
  } else {
    manifest.update(write_trajectory_tidy(run_dir, report_dir));
    outputs.push_back("report/tidy.csv");
  }

  manifest["outputs"] = std::move(outputs);
  write_json(report_dir + "/manifest.json", manifest);
  return 0;
}

}  // namespace molga::exp
