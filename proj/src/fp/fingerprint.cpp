#include "molga/fp/fingerprint.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "molga/util/hash.hpp"

namespace molga::fp {

Fingerprint Fingerprint::empty(int width, int radius) {
  if (width <= 0) throw std::invalid_argument("fingerprint width must be positive");
  if (radius < 0) throw std::invalid_argument("fingerprint radius must be non-negative");
  Fingerprint f;
  f.width = width;
  f.radius = radius;
  f.bits.assign(static_cast<std::size_t>((width + 63) / 64), 0);
  return f;
}

void Fingerprint::set(int bit) { bits[static_cast<std::size_t>(bit) / 64] |= 1ull << (bit % 64); }

bool Fingerprint::test(int bit) const {
  return (bits[static_cast<std::size_t>(bit) / 64] >> (bit % 64)) & 1ull;
}

int Fingerprint::popcount() const {
  int count = 0;
  for (std::uint64_t w : bits) count += __builtin_popcountll(w);
  return count;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < width; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

namespace {

// ids[r][a] = environment id of atom a after r refinement rounds.
std::vector<std::vector<std::uint64_t>> morgan_id_rounds(const chem::MoleculeGraph& mol,
                                                         int radius) {
  const int n = mol.atom_count();
  std::vector<std::vector<std::uint64_t>> rounds;
  rounds.reserve(static_cast<std::size_t>(radius) + 1);

  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const chem::Atom& atom = mol.atom(a);
    util::Fnv1a h;
    h.u64(static_cast<std::uint64_t>(atom.element));
    h.i64(mol.degree(a));
    h.i64(atom.implicit_h);
    h.i64(atom.charge);
    h.i64(mol.atom_in_ring(a) ? 1 : 0);
    ids[static_cast<std::size_t>(a)] = h.value();
  }
  rounds.push_back(ids);

  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      std::vector<std::pair<int, std::uint64_t>> env;
      env.reserve(mol.neighbors(a).size());
      for (const auto& nb : mol.neighbors(a)) {
        env.emplace_back(nb.order, ids[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      util::Fnv1a h;
      h.u64(ids[static_cast<std::size_t>(a)]);
      for (const auto& [order, id] : env) {
        h.i64(order);
        h.u64(id);
      }
      next[static_cast<std::size_t>(a)] = h.value();
    }
    ids = std::move(next);
    rounds.push_back(ids);
  }
  return rounds;
}

}  // namespace

std::vector<std::uint64_t> morgan_atom_ids(const chem::MoleculeGraph& mol, int radius) {
  if (radius < 0) throw std::invalid_argument("fingerprint radius must be non-negative");
  if (mol.atom_count() == 0) return {};
  return morgan_id_rounds(mol, radius).back();
}

Fingerprint morgan_fp(const chem::MoleculeGraph& mol, int radius, int width) {
  Fingerprint f = Fingerprint::empty(width, radius);
  const int n = mol.atom_count();
  if (n == 0) return f;

  // Neighborhood sizes per radius, to suppress ids of rounds that added
  // nothing (lone atoms, chain ends).
  std::vector<std::vector<int>> reach(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::deque<int> q{a};
    dist[static_cast<std::size_t>(a)] = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      if (dist[static_cast<std::size_t>(v)] >= radius) continue;
      for (const auto& nb : mol.neighbors(v)) {
        if (dist[static_cast<std::size_t>(nb.atom)] == -1) {
          dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(v)] + 1;
          q.push_back(nb.atom);
        }
      }
    }
    auto& r = reach[static_cast<std::size_t>(a)];
    r.assign(static_cast<std::size_t>(radius) + 1, 0);
    for (int v = 0; v < n; ++v) {
      int d = dist[static_cast<std::size_t>(v)];
      if (d >= 0) {
        for (int rr = d; rr <= radius; ++rr) ++r[static_cast<std::size_t>(rr)];
      }
    }
  }

  const auto rounds = morgan_id_rounds(mol, radius);
  for (int a = 0; a < n; ++a) {
    f.set(static_cast<int>(rounds[0][static_cast<std::size_t>(a)] %
                           static_cast<std::uint64_t>(width)));
  }
  for (int round = 1; round <= radius; ++round) {
    for (int a = 0; a < n; ++a) {
      const auto& r = reach[static_cast<std::size_t>(a)];
      if (r[static_cast<std::size_t>(round)] > r[static_cast<std::size_t>(round) - 1]) {
        f.set(static_cast<int>(rounds[static_cast<std::size_t>(round)][static_cast<std::size_t>(a)] %
                               static_cast<std::uint64_t>(width)));
      }
    }
  }
  return f;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width != b.width || a.radius != b.radius) {
    throw std::invalid_argument("fingerprint width/radius mismatch");
  }
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += __builtin_popcountll(a.bits[i] & b.bits[i]);
    uni += __builtin_popcountll(a.bits[i] | b.bits[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double internal_diversity(const std::vector<Fingerprint>& fps, bool include_diagonal) {
  if (fps.empty()) throw std::invalid_argument("internal_diversity of an empty set");
  const std::size_t n = fps.size();
  if (!include_diagonal && n == 1) return 0.0;
  // Literal row-major accumulation over all ordered pairs: any straight
  // transcription of the mean-pairwise-distance formula reproduces the
  // result bit for bit.
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;  // the diagonal contributes distance 0 either way
      sum += 1.0 - tanimoto(fps[i], fps[j]);
    }
  }
  double denom = include_diagonal ? static_cast<double>(n) * static_cast<double>(n)
                                  : static_cast<double>(n) * static_cast<double>(n - 1);
  return sum / denom;
}

double internal_diversity(const std::vector<chem::MoleculeGraph>& mols, bool include_diagonal) {
  std::vector<Fingerprint> fps;
  fps.reserve(mols.size());
  for (const auto& m : mols) fps.push_back(morgan_fp(m));
  return internal_diversity(fps, include_diagonal);
}

double fraction_unique(const std::vector<std::string>& canonical_keys) {
  if (canonical_keys.empty()) throw std::invalid_argument("fraction_unique of an empty population");
  std::set<std::string> distinct(canonical_keys.begin(), canonical_keys.end());
  return static_cast<double>(distinct.size()) / static_cast<double>(canonical_keys.size());
}

double fraction_unique(const std::vector<chem::MoleculeGraph>& mols) {
  std::vector<std::string> keys;
  keys.reserve(mols.size());
  for (const auto& m : mols) keys.push_back(chem::canonical_key(m));
  return fraction_unique(keys);
}

}  // namespace molga::fp
