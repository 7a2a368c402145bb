#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/util/rng.hpp"

namespace molga::selfies {

enum class SymbolKind { Atom, Branch, Ring };

// Semantic record of one alphabet token. Every token additionally acts as a
// base-16 digit (its alphabet index mod 16) when read in a branch/ring
// length position.
struct Symbol {
  std::string token;                       // bracketed text, e.g. "[=C]"
  SymbolKind kind = SymbolKind::Atom;
  chem::Element element = chem::Element::C;  // Atom only
  int order = 1;   // Atom: requested bond order; Branch: initial-bond cap; Ring: bond order
  int digits = 0;  // Branch/Ring: number of length digits L
  int digit_value = 0;  // alphabet index mod 16
};

class Alphabet {
public:
  // The 21-token default, identical to data/alphabet_default.json.
  static Alphabet builtin_default();
  // Load from a JSON config file (see the data file header for the format).
  static Alphabet load(const std::string& path);

  int size() const { return static_cast<int>(symbols_.size()); }
  const Symbol& symbol(int index) const { return symbols_[static_cast<std::size_t>(index)]; }
  std::optional<int> index_of(std::string_view token) const;
  int max_length() const { return max_length_; }

private:
  Alphabet(std::vector<Symbol> symbols, int max_length);

  std::vector<Symbol> symbols_;
  int max_length_ = 81;
};

// Symbol-index sequence over a fixed alphabet. The length bound is enforced
// at every construction; mutation code goes through from_indices.
class SelfiesString {
public:
  SelfiesString() = default;  // empty string; decodes to methane

  // Parse bracketed text like "[C][=O]". Unknown token or overlong input
  // throws std::invalid_argument (never inside decode).
  static SelfiesString parse(std::string_view text, const Alphabet& alphabet);
  static SelfiesString from_indices(std::vector<int> indices, const Alphabet& alphabet);

  const std::vector<int>& indices() const { return indices_; }
  int length() const { return static_cast<int>(indices_.size()); }
  std::string text(const Alphabet& alphabet) const;

  bool operator==(const SelfiesString& other) const { return indices_ == other.indices_; }

private:
  explicit SelfiesString(std::vector<int> indices) : indices_(std::move(indices)) {}

  std::vector<int> indices_;
};

// Derivation state machine; total: every string maps to a molecule passing
// validate(). Zero derived atoms (including empty input) yield methane.
chem::MoleculeGraph decode(const SelfiesString& s, const Alphabet& alphabet);

// Depth-first emission such that decode(encode(m)) is isomorphic to m
// (canonical_key equality). Throws std::runtime_error naming the offending
// atom when the molecule is not expressible in the alphabet (unsupported
// element/order, formal charge, disconnected graph, overlong result).
SelfiesString encode(const chem::MoleculeGraph& mol, const Alphabet& alphabet);

// Uniform i.i.d. symbols; length must be <= alphabet.max_length().
SelfiesString random_selfies(util::Rng& rng, int length, const Alphabet& alphabet);

}  // namespace molga::selfies
