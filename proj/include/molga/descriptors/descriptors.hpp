#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"

namespace molga::descriptors {

// Aromatic-system flags perceived from a kekulized graph. A basis ring of
// size 5 or 6 is aromatic when every ring atom can contribute to the pi
// system and the electron count satisfies the 4k+2 rule; an in-ring double
// bond contributes 1 per endpoint, an exocyclic double bond 1 if it points
// at carbon and 0 at a heteroatom, and a lone-pair donor (neutral N/O/S/P
// or anionic C with no double bond) contributes 2.
struct Aromaticity {
  std::vector<bool> atoms;  // indexed by atom
  std::vector<bool> bonds;  // indexed by bond
};

Aromaticity perceive_aromaticity(const chem::MoleculeGraph& mol);

// Wildman-Crippen octanol/water partition estimate: every heavy atom and
// its implicit hydrogens are classified by local environment and the
// published per-class contributions are summed.
struct CrippenResult {
  double logp = 0.0;
  std::vector<std::string> atom_types;  // per heavy atom, e.g. "C18"
  std::vector<std::string> h_types;     // per heavy atom; empty when it has no H
  int fallback_count = 0;               // atoms that hit an element catch-all class
};

CrippenResult crippen_logp_detailed(const chem::MoleculeGraph& mol);
double crippen_logp(const chem::MoleculeGraph& mol);

// Frequency table of radius-2 circular fragments over a reference corpus.
// score(id) is the base-10 log relative frequency; ids absent from the
// corpus score at the floor (minimum observed score minus 1). rescale_lo /
// rescale_hi are the raw-score endpoints of the affine map onto [1,10],
// calibrated offline together with the table.
class FragmentTable {
 public:
  static FragmentTable load(const std::string& path);
  static FragmentTable from_counts(const std::map<std::uint64_t, std::int64_t>& counts,
                                   double rescale_lo, double rescale_hi);

  void save(const std::string& path) const;

  double score(std::uint64_t env_id) const;
  double floor_score() const { return floor_; }
  double rescale_lo() const { return lo_; }
  double rescale_hi() const { return hi_; }
  std::size_t size() const { return scores_.size(); }

 private:
  std::map<std::uint64_t, double> scores_;
  double floor_ = -1.0;
  double lo_ = -4.0;
  double hi_ = 2.5;
};

// Synthetic-accessibility estimate in [1,10], low = easy. Mean fragment
// log-frequency minus size, macrocycle (any ring > 8), bridgehead and spiro
// penalties, mapped onto [1,10] with the table's calibrated affine rescale.
// The stereo term of the original heuristic is 0 here: graphs are achiral.
double sa_score(const chem::MoleculeGraph& mol, const FragmentTable& table);

// Atoms a molecule's largest basis ring has beyond six; 0 for acyclic.
double ring_penalty(const chem::MoleculeGraph& mol);

struct ComponentStats {
  double mean = 0.0;
  double std = 1.0;
};

// Z-normalization constants for the three fitness components, defaulting
// to the reference-dataset statistics the scores are reported against.
struct NormalizationParams {
  ComponentStats logp{2.47, 1.42};
  ComponentStats sa{3.05, 0.831};
  ComponentStats ring{0.038, 0.224};

  void validate() const;  // throws std::invalid_argument unless all stds > 0
};

// Full fitness breakdown of one molecule. J is the penalized-logP score;
// total additionally carries the discriminator term when one is attached.
struct FitnessRecord {
  double raw_logp = 0.0;
  double raw_sa = 0.0;
  double raw_ring = 0.0;
  double logp_norm = 0.0;
  double sa_norm = 0.0;
  double ring_norm = 0.0;
  double J = 0.0;
  std::optional<double> D;
  double beta = 0.0;
  double total = 0.0;

  // Attaches a discriminator score: total becomes J + beta * d.
  void apply_discriminator(double d, double beta_weight);
};

// Source of raw logP/SA values. The builtin provider computes them; the
// table provider replays values precomputed elsewhere, which lets search
// behavior be tested independently of descriptor fidelity.
class DescriptorProvider {
 public:
  virtual ~DescriptorProvider() = default;
  virtual double logp(const chem::MoleculeGraph& mol) const = 0;
  virtual double sa(const chem::MoleculeGraph& mol) const = 0;
};

class BuiltinDescriptors : public DescriptorProvider {
 public:
  explicit BuiltinDescriptors(FragmentTable table) : table_(std::move(table)) {}

  double logp(const chem::MoleculeGraph& mol) const override;
  double sa(const chem::MoleculeGraph& mol) const override;
  const FragmentTable& table() const { return table_; }

 private:
  FragmentTable table_;
};

// Reads lines of "canonical_key,logp,sa". Lookup of a key absent from the
// file throws std::out_of_range.
class TableDescriptors : public DescriptorProvider {
 public:
  static TableDescriptors load(const std::string& path);

  double logp(const chem::MoleculeGraph& mol) const override;
  double sa(const chem::MoleculeGraph& mol) const override;
  std::size_t size() const { return values_.size(); }

 private:
  std::map<std::string, std::pair<double, double>> values_;
};

// J = logp_norm - sa_norm - ring_norm with each component z-normalized by
// `params`. D and beta stay unset; total = J.
FitnessRecord penalized_logp(const chem::MoleculeGraph& mol, const DescriptorProvider& provider,
                             const NormalizationParams& params);

// Per-component mean and population standard deviation over a dataset,
// for renormalizing against a corpus other than the default reference.
NormalizationParams compute_normalization(const std::vector<chem::MoleculeGraph>& mols,
                                          const DescriptorProvider& provider);

}  // namespace molga::descriptors
