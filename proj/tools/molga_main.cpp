// Command-line experiment runner: random-sampling baselines, evolutionary
// runs with optional discriminator penalties, similarity-constrained
// optimization, Pareto analysis, and report packaging.
//
// Every run writes a config.resolved file holding all effective parameters;
// `molga <cmd> --config RUN/config.resolved` reproduces the run's CSV
// outputs byte-identically (command-line flags override file values).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "molga/exp/experiments.hpp"

namespace {

using molga::exp::ExperimentKind;
using molga::exp::ExperimentSpec;

// One config-file key tied to an option's storage; `opt->count() > 0` means
// the command line already set it and the file value must not override.
struct Binding {
  enum class Type { text, boolean, int32, uint64, real };
  std::string key;
  Type type = Type::text;
  void* target = nullptr;
  CLI::Option* opt = nullptr;
};

struct Opts {
  std::string config_path;

  std::string dataset = "data/zinc1k.smi";
  std::string alphabet;
  std::string table = "data/fragment_table.txt";
  std::string out;
  bool overwrite = false;
  std::uint64_t seed = 0;
  int repeats = 1;
  int jobs = 1;

  int pop_size = 500;
  int generations = 100;
  int elitism = 1;
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::string schedule = "const";
  int patience = 5;
  int window = 5;
  double sim_threshold = 0.8;
  int start_gen = -1;
  bool hold_until_change = false;
  std::string labels = "original";
  std::string disc;  // resolved: none when the run never weights D, else mlp
  int ref_sample = 500;
  bool reinit_disc = false;
  std::string seed_mode = "methane";

  std::string task = "none";
  std::string task_target;

  int samples = 50000;
  int length = 81;

  int targets = 20;
  double delta = 0.4;

  std::string experiment;  // guards against replaying a config with the wrong subcommand

  std::vector<Binding> bindings;
};

void bind(Opts& o, CLI::Option* opt, const char* key, std::string& field) {
  o.bindings.push_back({key, Binding::Type::text, &field, opt});
}
void bind(Opts& o, CLI::Option* opt, const char* key, bool& field) {
  o.bindings.push_back({key, Binding::Type::boolean, &field, opt});
}
void bind(Opts& o, CLI::Option* opt, const char* key, int& field) {
  o.bindings.push_back({key, Binding::Type::int32, &field, opt});
}
void bind(Opts& o, CLI::Option* opt, const char* key, std::uint64_t& field) {
  o.bindings.push_back({key, Binding::Type::uint64, &field, opt});
}
void bind(Opts& o, CLI::Option* opt, const char* key, double& field) {
  o.bindings.push_back({key, Binding::Type::real, &field, opt});
}

void add_common(CLI::App* sub, Opts& o) {
  sub->add_option("--config", o.config_path,
                  "Config file; command-line flags override its values");
  bind(o, sub->add_option("--experiment", o.experiment)->group(""), "experiment", o.experiment);
  bind(o, sub->add_option("--dataset", o.dataset, "Reference SMILES corpus"), "dataset",
       o.dataset);
  bind(o,
       sub->add_option("--alphabet", o.alphabet,
                       "Genome alphabet file (empty = built-in default)"),
       "alphabet", o.alphabet);
  bind(o, sub->add_option("--table", o.table, "Fragment frequency table for the SA score"),
       "table", o.table);
  bind(o, sub->add_option("--out", o.out, "Output directory base"), "out", o.out);
  bind(o,
       sub->add_flag("--overwrite", o.overwrite,
                     "Use --out verbatim instead of a unique timestamp+seed directory"),
       "overwrite", o.overwrite);
  bind(o, sub->add_option("--seed", o.seed, "Base RNG seed"), "seed", o.seed);
  bind(o,
       sub->add_option("--repeats", o.repeats, "Independent seeds per protocol")
           ->check(CLI::PositiveNumber),
       "repeats", o.repeats);
  bind(o, sub->add_option("--jobs", o.jobs, "Parallel worker slots")->check(CLI::PositiveNumber),
       "jobs", o.jobs);
}

void add_ga(CLI::App* sub, Opts& o) {
  bind(o, sub->add_option("--pop-size", o.pop_size, "Population size")->check(CLI::PositiveNumber),
       "pop-size", o.pop_size);
  bind(o,
       sub->add_option("--generations", o.generations, "Generations per run")
           ->check(CLI::NonNegativeNumber),
       "generations", o.generations);
  bind(o,
       sub->add_option("--elitism", o.elitism, "Individuals copied unchanged each generation")
           ->check(CLI::NonNegativeNumber),
       "elitism", o.elitism);
  bind(o,
       sub->add_option("--beta", o.beta,
                       "Discriminator weight (const) or penalty weight (time/sim schedules)"),
       "beta", o.beta);
  bind(o,
       sub->add_option("--schedule", o.schedule, "Discriminator weight schedule")
           ->check(CLI::IsMember({"const", "time", "sim"})),
       "schedule", o.schedule);
  bind(o,
       sub->add_option("--patience", o.patience, "Stagnant generations before the time trigger")
           ->check(CLI::PositiveNumber),
       "patience", o.patience);
  bind(o,
       sub->add_option("--window", o.window, "Best-molecule window for the similarity trigger")
           ->check(CLI::PositiveNumber),
       "window", o.window);
  bind(o, sub->add_option("--sim-threshold", o.sim_threshold, "Similarity trigger threshold"),
       "sim-threshold", o.sim_threshold);
  bind(o,
       sub->add_option("--start-gen", o.start_gen,
                       "First generation a schedule may trigger (-1 = schedule default)"),
       "start-gen", o.start_gen);
  bind(o,
       sub->add_flag("--hold-until-change", o.hold_until_change,
                     "Keep a triggered time penalty until the max fitness moves"),
       "hold-until-change", o.hold_until_change);
  bind(o,
       sub->add_option("--labels", o.labels, "Discriminator label convention")
           ->check(CLI::IsMember({"original", "flipped"})),
       "labels", o.labels);
  bind(o,
       sub->add_option("--disc", o.disc, "Discriminator architecture")
           ->check(CLI::IsMember({"mlp", "logistic", "none"})),
       "disc", o.disc);
  bind(o,
       sub->add_option("--ref-sample", o.ref_sample,
                       "Reference molecules drawn per training round")
           ->check(CLI::PositiveNumber),
       "ref-sample", o.ref_sample);
  bind(o,
       sub->add_flag("--reinit-disc", o.reinit_disc,
                     "Reinitialize the discriminator before every trained generation"),
       "reinit-disc", o.reinit_disc);
  bind(o,
       sub->add_option("--seed-mode", o.seed_mode, "Initial population source")
           ->check(CLI::IsMember({"methane", "dataset"})),
       "seed-mode", o.seed_mode);
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void assign(const Binding& b, const std::string& raw, const std::string& key) {
  switch (b.type) {
    case Binding::Type::text:
      *static_cast<std::string*>(b.target) = raw;
      return;
    case Binding::Type::boolean:
      if (raw != "true" && raw != "false") {
        throw std::invalid_argument("config key " + key + " expects true or false, got " + raw);
      }
      *static_cast<bool*>(b.target) = raw == "true";
      return;
    case Binding::Type::int32:
      *static_cast<int*>(b.target) = std::stoi(raw);
      return;
    case Binding::Type::uint64:
      *static_cast<std::uint64_t*>(b.target) = std::stoull(raw);
      return;
    case Binding::Type::real:
      *static_cast<double*>(b.target) = std::stod(raw);
      return;
  }
}

// Applies key=value pairs to every option the command line left untouched.
void apply_config(Opts& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw std::runtime_error("cannot read config file " + o.config_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = strip(line);
    if (text.empty() || text[0] == '#' || text[0] == '[') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(o.config_path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    }
    const std::string key = strip(text.substr(0, eq));
    std::string value = strip(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    const Binding* found = nullptr;
    for (const Binding& b : o.bindings) {
      if (b.key == key) {
        found = &b;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument(o.config_path + ": unknown config key '" + key +
                                  "' for this subcommand");
    }
    if (found->opt->count() > 0) continue;  // command line wins
    try {
      assign(*found, value, key);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument(o.config_path + ":" + std::to_string(line_no) +
                                  ": bad value for " + key);
    }
  }
}

void resolve(Opts& o) {
  if (o.schedule == "const") {
    if (std::isnan(o.beta)) o.beta = 0.0;
    if (o.start_gen < 0) o.start_gen = 0;
  } else if (o.schedule == "time") {
    if (std::isnan(o.beta)) o.beta = 1000.0;
    if (o.start_gen < 0) o.start_gen = 100;
  } else {
    if (std::isnan(o.beta)) o.beta = 1000.0;
    if (o.start_gen < 0) o.start_gen = 20;
  }
  if (o.disc.empty()) {
    o.disc = (o.schedule == "const" && o.beta == 0.0) ? "none" : "mlp";
  }
}

molga::ga::GAConfig build_ga_config(const Opts& o) {
  molga::ga::GAConfig cfg;
  cfg.population_size = o.pop_size;
  cfg.generations = o.generations;
  cfg.elitism = o.elitism;
  cfg.seed = o.seed;
  if (o.schedule == "const") {
    cfg.schedule = molga::ga::ConstantSchedule{o.beta};
  } else if (o.schedule == "time") {
    cfg.schedule =
        molga::ga::TimeAdaptiveSchedule{o.beta, o.patience, o.start_gen, o.hold_until_change};
  } else {
    cfg.schedule = molga::ga::SimilaritySchedule{o.beta, o.sim_threshold, o.window, o.start_gen};
  }
  if (o.disc == "mlp") {
    cfg.architecture = molga::ga::DiscriminatorArch::mlp;
  } else if (o.disc == "logistic") {
    cfg.architecture = molga::ga::DiscriminatorArch::logistic;
  } else {
    cfg.architecture = molga::ga::DiscriminatorArch::none;
  }
  cfg.convention = o.labels == "flipped" ? molga::disc::LabelConvention::flipped
                                         : molga::disc::LabelConvention::original;
  cfg.reinit_discriminator = o.reinit_disc;
  cfg.reference_sample_size = o.ref_sample;
  cfg.seed_mode = o.seed_mode == "dataset" ? molga::ga::SeedMode::dataset_top
                                           : molga::ga::SeedMode::methane;
  return cfg;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// All effective parameters, resolved; reading this file back reproduces the
// run's CSV outputs byte-identically.
void write_config_resolved(const ExperimentSpec& spec, const Opts& o, bool with_ga) {
  std::FILE* f = std::fopen((spec.out_dir + "/config.resolved").c_str(), "w");
  if (!f) throw std::runtime_error("cannot write config.resolved");
  std::fprintf(f, "experiment=%s\n", molga::exp::kind_name(spec.kind).c_str());
  std::fprintf(f, "dataset=%s\n", quoted(o.dataset).c_str());
  std::fprintf(f, "alphabet=%s\n", quoted(o.alphabet).c_str());
  std::fprintf(f, "table=%s\n", quoted(o.table).c_str());
  std::fprintf(f, "out=%s\n", quoted(o.out).c_str());
  std::fprintf(f, "overwrite=%s\n", o.overwrite ? "true" : "false");
  std::fprintf(f, "seed=%llu\n", static_cast<unsigned long long>(o.seed));
  std::fprintf(f, "repeats=%d\n", o.repeats);
  std::fprintf(f, "jobs=%d\n", o.jobs);
  if (with_ga) {
    std::fprintf(f, "pop-size=%d\n", o.pop_size);
    std::fprintf(f, "generations=%d\n", o.generations);
    std::fprintf(f, "elitism=%d\n", o.elitism);
    std::fprintf(f, "beta=%s\n", num(o.beta).c_str());
    std::fprintf(f, "schedule=%s\n", o.schedule.c_str());
    std::fprintf(f, "patience=%d\n", o.patience);
    std::fprintf(f, "window=%d\n", o.window);
    std::fprintf(f, "sim-threshold=%s\n", num(o.sim_threshold).c_str());
    std::fprintf(f, "start-gen=%d\n", o.start_gen);
    std::fprintf(f, "hold-until-change=%s\n", o.hold_until_change ? "true" : "false");
    std::fprintf(f, "labels=%s\n", o.labels.c_str());
    std::fprintf(f, "disc=%s\n", o.disc.c_str());
    std::fprintf(f, "ref-sample=%d\n", o.ref_sample);
    std::fprintf(f, "reinit-disc=%s\n", o.reinit_disc ? "true" : "false");
    std::fprintf(f, "seed-mode=%s\n", o.seed_mode.c_str());
  }
  if (spec.kind == ExperimentKind::baseline) {
    std::fprintf(f, "samples=%d\n", o.samples);
    std::fprintf(f, "length=%d\n", o.length);
  }
  if (spec.kind == ExperimentKind::evolve || spec.kind == ExperimentKind::rediscovery ||
      spec.kind == ExperimentKind::similarity_task) {
    std::fprintf(f, "task=%s\n", o.task.c_str());
    std::fprintf(f, "task-target=%s\n", quoted(o.task_target).c_str());
  }
  if (spec.kind == ExperimentKind::constrained) {
    std::fprintf(f, "targets=%d\n", o.targets);
    std::fprintf(f, "delta=%s\n", num(o.delta).c_str());
  }
  std::fclose(f);
}

void check_experiment_key(const Opts& o, std::initializer_list<const char*> allowed) {
  if (o.experiment.empty()) return;
  for (const char* name : allowed) {
    if (o.experiment == name) return;
  }
  throw std::invalid_argument("config file belongs to a '" + o.experiment +
                              "' run; rerun it with that subcommand");
}

ExperimentSpec finish_spec(Opts& o, ExperimentKind kind, bool with_ga) {
  resolve(o);
  ExperimentSpec spec;
  spec.kind = kind;
  spec.config = build_ga_config(o);
  spec.dataset_path = o.dataset;
  spec.alphabet_path = o.alphabet;
  spec.table_path = o.table;
  spec.repeats = o.repeats;
  spec.jobs = o.jobs;
  spec.baseline_samples = o.samples;
  spec.sample_length = o.length;
  spec.constrained_targets = o.targets;
  spec.constrained_delta = o.delta;
  spec.task_target = o.task_target;
  if (o.out.empty()) o.out = "runs/" + molga::exp::kind_name(kind);
  spec.out_dir = molga::exp::resolve_out_dir(o.out, o.seed, o.overwrite);
  write_config_resolved(spec, o, with_ga);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SELFIES genetic algorithm for molecular design"};
  app.require_subcommand(1);

  Opts baseline_opts, evolve_opts, constrained_opts, pareto_opts;
  std::string report_dir;

  CLI::App* baseline = app.add_subcommand("baseline", "Score random genomes against the corpus");
  add_common(baseline, baseline_opts);
  bind(baseline_opts,
       baseline->add_option("--samples", baseline_opts.samples, "Random genomes to draw")
           ->check(CLI::PositiveNumber),
       "samples", baseline_opts.samples);
  bind(baseline_opts,
       baseline->add_option("--length", baseline_opts.length, "Tokens per random genome")
           ->check(CLI::PositiveNumber),
       "length", baseline_opts.length);

  CLI::App* evolve = app.add_subcommand("evolve", "Run the evolutionary search");
  add_common(evolve, evolve_opts);
  add_ga(evolve, evolve_opts);
  bind(evolve_opts,
       evolve
           ->add_option("--task", evolve_opts.task, "Goal-directed task instead of penalized logP")
           ->check(CLI::IsMember({"none", "rediscovery", "similarity"})),
       "task", evolve_opts.task);
  bind(evolve_opts,
       evolve->add_option("--task-target", evolve_opts.task_target,
                          "Task target SMILES (empty = best-scoring dataset molecule)"),
       "task-target", evolve_opts.task_target);

  CLI::App* constrained =
      app.add_subcommand("constrained", "Improve low-scoring dataset molecules in-place");
  add_common(constrained, constrained_opts);
  add_ga(constrained, constrained_opts);
  bind(constrained_opts,
       constrained
           ->add_option("--targets", constrained_opts.targets, "Lowest-scoring targets to run")
           ->check(CLI::PositiveNumber),
       "targets", constrained_opts.targets);
  bind(constrained_opts,
       constrained->add_option("--delta", constrained_opts.delta,
                               "Minimum Tanimoto similarity to the target"),
       "delta", constrained_opts.delta);

  CLI::App* pareto =
      app.add_subcommand("pareto", "Evolve, then compare fronts against the dataset");
  add_common(pareto, pareto_opts);
  add_ga(pareto, pareto_opts);

  CLI::App* report = app.add_subcommand("report", "Package a run directory for plotting");
  report->add_option("run_dir", report_dir, "Completed run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (baseline->parsed()) {
      apply_config(baseline_opts);
      check_experiment_key(baseline_opts, {"baseline"});
      const ExperimentSpec spec = finish_spec(baseline_opts, ExperimentKind::baseline, false);
      std::printf("baseline -> %s\n", spec.out_dir.c_str());
      return molga::exp::cmd_baseline(spec);
    }
    if (evolve->parsed()) {
      apply_config(evolve_opts);
      check_experiment_key(evolve_opts, {"evolve", "rediscovery", "similarity-task"});
      ExperimentKind kind = ExperimentKind::evolve;
      if (evolve_opts.task == "rediscovery") kind = ExperimentKind::rediscovery;
      if (evolve_opts.task == "similarity") kind = ExperimentKind::similarity_task;
      const ExperimentSpec spec = finish_spec(evolve_opts, kind, true);
      std::printf("%s -> %s\n", molga::exp::kind_name(kind).c_str(), spec.out_dir.c_str());
      return molga::exp::cmd_evolve(spec);
    }
    if (constrained->parsed()) {
      apply_config(constrained_opts);
      check_experiment_key(constrained_opts, {"constrained"});
      const ExperimentSpec spec = finish_spec(constrained_opts, ExperimentKind::constrained, true);
      std::printf("constrained -> %s\n", spec.out_dir.c_str());
      return molga::exp::cmd_constrained(spec);
    }
    if (pareto->parsed()) {
      apply_config(pareto_opts);
      check_experiment_key(pareto_opts, {"pareto"});
      const ExperimentSpec spec = finish_spec(pareto_opts, ExperimentKind::pareto, true);
      std::printf("pareto -> %s\n", spec.out_dir.c_str());
      return molga::exp::cmd_pareto(spec);
    }
    if (report->parsed()) {
      return molga::exp::cmd_report(report_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
