#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace molga::chem {

// Supported element set. Hydrogens are never stored; every atom carries an
// implicit hydrogen count instead.
enum class Element : std::uint8_t { C, N, O, F, S, P, Cl, Br };

constexpr int kElementCount = 8;

// Fixed valence table. Charge adjusts the effective maximum so that species
// such as [N+] (valence 4) or [O-] (valence 1) remain representable.
int max_valence(Element e);
int max_valence(Element e, int charge);

std::string_view element_symbol(Element e);
std::optional<Element> element_from_symbol(std::string_view s);
double element_atomic_mass(Element e);

struct Atom {
  Element element = Element::C;
  std::int8_t charge = 0;
  std::uint8_t implicit_h = 0;
};

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;  // 1, 2 or 3
};

struct Violation {
  int atom = -1;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Immutable molecular graph. Atoms are (element, charge); bonds carry integer
// orders; implicit hydrogen counts follow the hydrogen-saturated convention
// (implicit H = effective max valence - incident bond order sum, floored at 0
// so that over-valent graphs stay representable for validate()).
//
// Construction rejects structural malformation (bad indices, self bonds,
// duplicate bonds, orders outside 1..3) with std::invalid_argument. Chemical
// over-valence is *not* rejected here; validate() reports it as a verdict.
class MoleculeGraph {
public:
  struct AtomSpec {
    Element element;
    int charge = 0;
  };

  MoleculeGraph() = default;
  MoleculeGraph(const std::vector<AtomSpec>& atoms, const std::vector<Bond>& bonds);

  static MoleculeGraph methane() { return MoleculeGraph({{Element::C, 0}}, {}); }

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  struct Neighbor {
    int atom;
    int order;
    int bond;  // index into bonds()
  };
  const std::vector<Neighbor>& neighbors(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }

  int degree(int i) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(i)].size()); }
  int bond_order_sum(int i) const;
  bool has_bond(int a, int b) const;
  int bond_order_between(int a, int b) const;  // 0 if absent
  bool atom_in_ring(int i) const { return in_ring_[static_cast<std::size_t>(i)]; }
  bool bond_in_ring(int bond_index) const { return bond_in_ring_[static_cast<std::size_t>(bond_index)]; }
  bool connected() const;

  double molecular_weight() const;  // includes implicit hydrogens

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<bool> in_ring_;       // atom lies on some cycle
  std::vector<bool> bond_in_ring_;  // bond is not a bridge

  void compute_ring_membership();
};

// Verdict-returning invariant check: per-atom valence table compliance.
// Construction keeps over-valent graphs; this reports them with atom indices.
ValidationResult validate(const MoleculeGraph& mol);

// Size of the largest cycle in a minimum cycle basis (Horton candidates,
// greedy GF(2) independence, ties by lexicographic atom-index order).
// 0 for acyclic molecules.
int max_ring_size(const MoleculeGraph& mol);

// All cycles of a minimum cycle basis, each as a list of atom indices in
// traversal order. Used by descriptor code that needs per-ring information.
std::vector<std::vector<int>> minimum_cycle_basis(const MoleculeGraph& mol);

// Number of non-hydrogen atoms (all stored atoms are heavy).
int heavy_atom_count(const MoleculeGraph& mol);

// Canonical atom order: a permutation `perm` with perm[rank] = atom index,
// identical for graph-isomorphic inputs. Computed by iterative neighborhood
// refinement with branching over residual symmetry, taking the
// lexicographically smallest serialization.
std::vector<int> canonical_order(const MoleculeGraph& mol);

// Stable hash key over the canonical serialization; equal for isomorphic
// molecules, platform independent.
std::string canonical_key(const MoleculeGraph& mol);

}  // namespace molga::chem
