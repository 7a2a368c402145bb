#pragma once

#include <string>
#include <vector>

#include "molga/descriptors/descriptors.hpp"
#include "molga/ga/ga.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/smiles/smiles.hpp"

namespace molga::exp {

enum class ExperimentKind { baseline, evolve, constrained, pareto, rediscovery, similarity_task };

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);  // throws std::invalid_argument

// A fully resolved experiment: every field carries its effective value, so
// a run is a pure function of this struct plus the referenced files.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::evolve;
  ga::GAConfig config;
  std::string dataset_path = "data/zinc1k.smi";
  std::string alphabet_path;  // empty selects the built-in default alphabet
  std::string table_path = "data/fragment_table.txt";
  std::string out_dir;  // resolved output directory, created by the caller
  int repeats = 1;
  int jobs = 1;

  int baseline_samples = 50000;
  int sample_length = 81;

  int constrained_targets = 20;
  double constrained_delta = 0.4;

  // Target SMILES for rediscovery / similarity tasks; empty picks the
  // highest-J dataset molecule.
  std::string task_target;
};

// Everything the experiment commands read but do not own, loaded once from
// the spec's file references.
struct Environment {
  selfies::Alphabet alphabet;
  descriptors::BuiltinDescriptors provider;
  descriptors::NormalizationParams normalization;
  smiles::Dataset dataset;
  std::vector<chem::MoleculeGraph> reference;  // dataset molecules, in file order
};

Environment load_environment(const ExperimentSpec& spec);

// Each command writes its artifacts under spec.out_dir and returns a
// process exit code: 0 iff every seed/target completed.
int cmd_baseline(const ExperimentSpec& spec);
int cmd_evolve(const ExperimentSpec& spec);  // also runs rediscovery / similarity kinds
int cmd_constrained(const ExperimentSpec& spec);
int cmd_pareto(const ExperimentSpec& spec);

// Repackages a completed run directory into report/tidy.csv (+ front.csv
// for pareto runs) and report/manifest.json. Missing inputs are listed on
// stderr and yield a nonzero exit code.
int cmd_report(const std::string& run_dir);

// base unless overwrite, else base-<UTC timestamp>-seed<seed>, suffixed
// -2, -3, ... on collision. Creates the directory.
std::string resolve_out_dir(const std::string& base, std::uint64_t seed, bool overwrite);

}  // namespace molga::exp
