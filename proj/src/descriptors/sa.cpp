#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "molga/descriptors/descriptors.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/util/hash.hpp"

namespace molga::descriptors {

using chem::MoleculeGraph;

FragmentTable FragmentTable::from_counts(const std::map<std::uint64_t, std::int64_t>& counts,
                                         double rescale_lo, double rescale_hi) {
  if (counts.empty()) throw std::invalid_argument("fragment table needs at least one fragment");
  if (!(rescale_hi > rescale_lo)) {
    throw std::invalid_argument("fragment table rescale interval must be non-empty");
  }
  std::int64_t total = 0;
  for (const auto& [id, count] : counts) {
    if (count <= 0) throw std::invalid_argument("fragment counts must be positive");
    total += count;
  }
  FragmentTable t;
  double min_score = std::numeric_limits<double>::infinity();
  for (const auto& [id, count] : counts) {
    const double score = std::log10(static_cast<double>(count) / static_cast<double>(total));
    t.scores_[id] = score;
    min_score = std::min(min_score, score);
  }
  t.floor_ = min_score - 1.0;
  t.lo_ = rescale_lo;
  t.hi_ = rescale_hi;
  return t;
}

FragmentTable FragmentTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fragment table: " + path);
  std::string header;
  if (!std::getline(in, header) || header != "fragment-table v1") {
    throw std::runtime_error("unrecognized fragment table header in " + path);
  }
  FragmentTable t;
  bool have_rescale = false;
  bool have_floor = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string first;
    row >> first;
    if (first == "rescale") {
      if (!(row >> t.lo_ >> t.hi_) || !(t.hi_ > t.lo_)) {
        throw std::runtime_error("bad rescale line in fragment table: " + line);
      }
      have_rescale = true;
    } else if (first == "floor") {
      if (!(row >> t.floor_)) throw std::runtime_error("bad floor line in fragment table: " + line);
      have_floor = true;
    } else {
      std::uint64_t id = 0;
      try {
        id = std::stoull(first, nullptr, 16);
      } catch (const std::exception&) {
        throw std::runtime_error("bad fragment id in fragment table: " + line);
      }
      double score = 0.0;
      if (!(row >> score)) throw std::runtime_error("bad fragment score in table: " + line);
      t.scores_[id] = score;
    }
  }
  if (!have_rescale || !have_floor || t.scores_.empty()) {
    throw std::runtime_error("incomplete fragment table: " + path);
  }
  return t;
}

void FragmentTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fragment table: " + path);
  out.precision(17);
  out << "fragment-table v1\n";
  out << "rescale " << lo_ << " " << hi_ << "\n";
  out << "floor " << floor_ << "\n";
  for (const auto& [id, score] : scores_) {
    out << util::hex64(id) << " " << score << "\n";
  }
  if (!out) throw std::runtime_error("failed writing fragment table: " + path);
}

double FragmentTable::score(std::uint64_t env_id) const {
  const auto it = scores_.find(env_id);
  return it == scores_.end() ? floor_ : it->second;
}

namespace {

// Bridgehead atoms: ends of a multi-bond path shared by two basis rings.
// Spiro atoms: sole shared atom of two basis rings.
std::pair<int, int> bridge_and_spiro_counts(const std::vector<std::vector<int>>& rings) {
  std::set<int> bridgeheads;
  std::set<int> spiros;
  const auto ring_bonds = [](const std::vector<int>& ring) {
    std::set<std::pair<int, int>> bonds;
    const int sz = static_cast<int>(ring.size());
    for (int i = 0; i < sz; ++i) {
      const int a = ring[static_cast<std::size_t>(i)];
      const int b = ring[static_cast<std::size_t>((i + 1) % sz)];
      bonds.insert({std::min(a, b), std::max(a, b)});
    }
    return bonds;
  };
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const std::set<int> atoms_i(rings[i].begin(), rings[i].end());
    const auto bonds_i = ring_bonds(rings[i]);
    for (std::size_t j = i + 1; j < rings.size(); ++j) {
      std::vector<int> shared_atoms;
      for (int a : rings[j]) {
        if (atoms_i.count(a)) shared_atoms.push_back(a);
      }
      if (shared_atoms.empty()) continue;
      if (shared_atoms.size() == 1) {
        spiros.insert(shared_atoms[0]);
        continue;
      }
      const auto bonds_j = ring_bonds(rings[j]);
      std::map<int, int> shared_degree;
      int shared_bonds = 0;
      for (const auto& bond : bonds_j) {
        if (bonds_i.count(bond)) {
          ++shared_bonds;
          ++shared_degree[bond.first];
          ++shared_degree[bond.second];
        }
      }
      if (shared_bonds < 2) continue;  // plain ring fusion along one bond
      for (const auto& [atom, deg] : shared_degree) {
        if (deg == 1) bridgeheads.insert(atom);
      }
    }
  }
  return {static_cast<int>(bridgeheads.size()), static_cast<int>(spiros.size())};
}

}  // namespace

double sa_score(const MoleculeGraph& mol, const FragmentTable& table) {
  if (mol.atom_count() == 0) throw std::invalid_argument("sa_score of an empty molecule");

  const auto ids = fp::morgan_atom_ids(mol, 2);
  std::vector<double> scores;
  scores.reserve(ids.size());
  for (const std::uint64_t id : ids) scores.push_back(table.score(id));
  // Value-ordered sum keeps the result independent of atom numbering.
  std::sort(scores.begin(), scores.end());
  double fragment_term = 0.0;
  for (const double s : scores) fragment_term += s;
  fragment_term /= static_cast<double>(ids.size());

  const int n = chem::heavy_atom_count(mol);
  const double size_penalty = std::pow(static_cast<double>(n), 1.005) - static_cast<double>(n);

  const auto rings = chem::minimum_cycle_basis(mol);
  bool has_macrocycle = false;
  for (const auto& ring : rings) {
    if (ring.size() > 8) has_macrocycle = true;
  }
  const double macro_penalty = has_macrocycle ? std::log10(2.0) : 0.0;

  const auto [bridgeheads, spiros] = bridge_and_spiro_counts(rings);
  const double bridge_penalty = std::log10(static_cast<double>(bridgeheads) + 1.0);
  const double spiro_penalty = std::log10(static_cast<double>(spiros) + 1.0);

  const double raw =
      fragment_term - size_penalty - macro_penalty - bridge_penalty - spiro_penalty;
  const double scaled =
      11.0 - (raw - table.rescale_lo() + 1.0) * 9.0 / (table.rescale_hi() - table.rescale_lo());
  return std::clamp(scaled, 1.0, 10.0);
}

double ring_penalty(const MoleculeGraph& mol) {
  return std::max(0, chem::max_ring_size(mol) - 6);
}

}  // namespace molga::descriptors
