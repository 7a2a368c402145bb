#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"

namespace molga::fp {

// Fixed-width bit vector with its generation parameters recorded; mixing
// widths or radii in set operations is a caller bug and rejected.
struct Fingerprint {
  int width = 0;
  int radius = 0;
  std::vector<std::uint64_t> bits;

  static Fingerprint empty(int width, int radius);
  void set(int bit);
  bool test(int bit) const;
  int popcount() const;
  std::vector<int> on_bits() const;

  bool operator==(const Fingerprint& other) const = default;
};

// Morgan/circular fingerprint. Initial atom invariant: element, degree,
// implicit H count, charge, ring membership. Each round hashes
// (own id, sorted (bond order, neighbor id) pairs); a round's id is emitted
// only when the atom's neighborhood actually grew, so methane at radius 2
// sets exactly one bit. Platform-stable (FNV-1a).
Fingerprint morgan_fp(const chem::MoleculeGraph& mol, int radius = 2, int width = 2048);

// Unfolded circular-environment identifier of each atom after `radius`
// refinement rounds. Two atoms get the same id exactly when their
// radius-balls are isomorphic, so the ids serve as fragment keys.
std::vector<std::uint64_t> morgan_atom_ids(const chem::MoleculeGraph& mol, int radius = 2);

// |a AND b| / |a OR b|; defined as 1 when both vectors are all-zero.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Mean pairwise Tanimoto distance over the full A x A sum (diagonal
// included by default, matching the literal formula), divided by |A|^2.
// With include_diagonal=false the mean runs over the N^2 - N off-diagonal
// ordered pairs instead.
double internal_diversity(const std::vector<Fingerprint>& fps, bool include_diagonal = true);
double internal_diversity(const std::vector<chem::MoleculeGraph>& mols,
                          bool include_diagonal = true);

// |distinct canonical keys| / |population|.
double fraction_unique(const std::vector<std::string>& canonical_keys);
double fraction_unique(const std::vector<chem::MoleculeGraph>& mols);

}  // namespace molga::fp
