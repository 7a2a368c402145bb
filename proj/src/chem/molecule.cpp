#include "molga/chem/molecule.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "molga/util/hash.hpp"

namespace molga::chem {

namespace {

struct ElementInfo {
  std::string_view symbol;
  int valence;
  double mass;
};

constexpr ElementInfo kElements[kElementCount] = {
    {"C", 4, 12.011}, {"N", 3, 14.007}, {"O", 2, 15.999},  {"F", 1, 18.998},
    {"S", 6, 32.06},  {"P", 5, 30.974}, {"Cl", 1, 35.45},  {"Br", 1, 79.904},
};

}  // namespace

int max_valence(Element e) { return kElements[static_cast<int>(e)].valence; }

int max_valence(Element e, int charge) {
  int base = max_valence(e);
  if (charge == 0) return base;
  // Organic-subset convention: a positive charge on N/O/S/P adds a bonding
  // slot, a negative one removes it; carbon loses a slot either way.
  switch (e) {
    case Element::C:
      return std::max(0, base - std::abs(charge));
    case Element::N:
    case Element::O:
    case Element::S:
    case Element::P:
      return std::max(0, base + charge);
    default:
      return std::max(0, base - std::abs(charge));
  }
}

std::string_view element_symbol(Element e) { return kElements[static_cast<int>(e)].symbol; }

std::optional<Element> element_from_symbol(std::string_view s) {
  for (int i = 0; i < kElementCount; ++i) {
    if (kElements[i].symbol == s) return static_cast<Element>(i);
  }
  return std::nullopt;
}

double element_atomic_mass(Element e) { return kElements[static_cast<int>(e)].mass; }

MoleculeGraph::MoleculeGraph(const std::vector<AtomSpec>& atoms, const std::vector<Bond>& bonds) {
  const int n = static_cast<int>(atoms.size());
  atoms_.reserve(atoms.size());
  for (const AtomSpec& spec : atoms) {
    if (spec.charge < -3 || spec.charge > 3) throw std::invalid_argument("charge out of range");
    atoms_.push_back(Atom{spec.element, static_cast<std::int8_t>(spec.charge), 0});
  }
  adjacency_.assign(atoms.size(), {});
  std::set<std::pair<int, int>> seen;
  bonds_.reserve(bonds.size());
  for (const Bond& b : bonds) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n) throw std::invalid_argument("bond atom index out of range");
    if (b.a == b.b) throw std::invalid_argument("self bond");
    if (b.order < 1 || b.order > 3) throw std::invalid_argument("bond order must be 1..3");
    auto key = std::minmax(b.a, b.b);
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate bond");
    int idx = static_cast<int>(bonds_.size());
    bonds_.push_back(Bond{key.first, key.second, b.order});
    adjacency_[static_cast<std::size_t>(b.a)].push_back({b.b, b.order, idx});
    adjacency_[static_cast<std::size_t>(b.b)].push_back({b.a, b.order, idx});
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.atom < y.atom; });
  }
  for (int i = 0; i < n; ++i) {
    int slack = max_valence(atoms_[static_cast<std::size_t>(i)].element,
                            atoms_[static_cast<std::size_t>(i)].charge) -
                bond_order_sum(i);
    atoms_[static_cast<std::size_t>(i)].implicit_h =
        static_cast<std::uint8_t>(std::max(0, slack));
  }
  compute_ring_membership();
}

int MoleculeGraph::bond_order_sum(int i) const {
  int sum = 0;
  for (const Neighbor& nb : adjacency_[static_cast<std::size_t>(i)]) sum += nb.order;
  return sum;
}

bool MoleculeGraph::has_bond(int a, int b) const {
  return bond_order_between(a, b) != 0;
}

int MoleculeGraph::bond_order_between(int a, int b) const {
  for (const Neighbor& nb : adjacency_[static_cast<std::size_t>(a)]) {
    if (nb.atom == b) return nb.order;
  }
  return 0;
}

bool MoleculeGraph::connected() const {
  if (atoms_.empty()) return true;
  std::vector<bool> seen(atoms_.size(), false);
  std::deque<int> queue{0};
  seen[0] = true;
  int count = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const Neighbor& nb : neighbors(v)) {
      if (!seen[static_cast<std::size_t>(nb.atom)]) {
        seen[static_cast<std::size_t>(nb.atom)] = true;
        ++count;
        queue.push_back(nb.atom);
      }
    }
  }
  return count == atom_count();
}

double MoleculeGraph::molecular_weight() const {
  double mw = 0.0;
  for (const Atom& a : atoms_) {
    mw += element_atomic_mass(a.element) + 1.008 * a.implicit_h;
  }
  return mw;
}

void MoleculeGraph::compute_ring_membership() {
  // Tarjan bridge detection; a bond is in a ring iff it is not a bridge.
  const int n = atom_count();
  in_ring_.assign(static_cast<std::size_t>(n), false);
  bond_in_ring_.assign(bonds_.size(), false);
  if (n == 0) return;
  std::vector<int> disc(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  int timer = 0;

  struct Frame {
    int v;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] != -1) continue;
    stack.push_back({root, -1, 0});
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = adjacency_[static_cast<std::size_t>(f.v)];
      if (f.next < nbrs.size()) {
        const Neighbor& nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[static_cast<std::size_t>(nb.atom)] == -1) {
          disc[static_cast<std::size_t>(nb.atom)] = low[static_cast<std::size_t>(nb.atom)] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[static_cast<std::size_t>(f.v)] =
              std::min(low[static_cast<std::size_t>(f.v)], disc[static_cast<std::size_t>(nb.atom)]);
          bond_in_ring_[static_cast<std::size_t>(nb.bond)] = true;  // back edges close a cycle
        }
      } else {
        int v = f.v;
        int pb = f.parent_bond;
        stack.pop_back();
        if (!stack.empty()) {
          int u = stack.back().v;
          low[static_cast<std::size_t>(u)] =
              std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
          if (low[static_cast<std::size_t>(v)] > disc[static_cast<std::size_t>(u)]) {
            // bridge u-v stays false
          } else if (pb >= 0) {
            bond_in_ring_[static_cast<std::size_t>(pb)] = true;
          }
        }
      }
    }
  }
  for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
    if (bond_in_ring_[bi]) {
      in_ring_[static_cast<std::size_t>(bonds_[bi].a)] = true;
      in_ring_[static_cast<std::size_t>(bonds_[bi].b)] = true;
    }
  }
}

ValidationResult validate(const MoleculeGraph& mol) {
  ValidationResult result;
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& a = mol.atom(i);
    int cap = max_valence(a.element, a.charge);
    int sum = mol.bond_order_sum(i);
    if (sum + a.implicit_h > cap) {
      result.violations.push_back(
          {i, "valence violation: bond order sum " + std::to_string(sum) + " + " +
                  std::to_string(int(a.implicit_h)) + "H exceeds max valence " +
                  std::to_string(cap) + " of " + std::string(element_symbol(a.element))});
    }
  }
  return result;
}

int heavy_atom_count(const MoleculeGraph& mol) { return mol.atom_count(); }

// ---------------------------------------------------------------------------
// Minimum cycle basis
// ---------------------------------------------------------------------------

namespace {

using EdgeSet = std::vector<std::uint64_t>;

EdgeSet make_edge_set(const std::vector<int>& edge_indices, int edge_count) {
  EdgeSet s(static_cast<std::size_t>((edge_count + 63) / 64), 0);
  for (int e : edge_indices) s[static_cast<std::size_t>(e) / 64] |= 1ull << (e % 64);
  return s;
}

void xor_into(EdgeSet& a, const EdgeSet& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

bool is_zero(const EdgeSet& a) {
  for (std::uint64_t w : a) {
    if (w != 0) return false;
  }
  return true;
}

int lowest_bit(const EdgeSet& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) return static_cast<int>(i * 64) + __builtin_ctzll(a[i]);
  }
  return -1;
}

struct CandidateCycle {
  std::vector<int> atoms;        // traversal order
  std::vector<int> edge_indices;
  std::vector<int> sorted_atoms;
};

}  // namespace

std::vector<std::vector<int>> minimum_cycle_basis(const MoleculeGraph& mol) {
  const int n = mol.atom_count();
  const int m = mol.bond_count();
  if (n == 0 || m == 0) return {};

  int components = 0;
  {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      if (seen[static_cast<std::size_t>(i)]) continue;
      ++components;
      std::deque<int> q{i};
      seen[static_cast<std::size_t>(i)] = true;
      while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (const auto& nb : mol.neighbors(v)) {
          if (!seen[static_cast<std::size_t>(nb.atom)]) {
            seen[static_cast<std::size_t>(nb.atom)] = true;
            q.push_back(nb.atom);
          }
        }
      }
    }
  }
  const int rank_needed = m - n + components;
  if (rank_needed <= 0) return {};

  // Horton candidates: shortest-path cycles through (root, edge) pairs.
  // BFS visits neighbors in ascending index order, so paths are canonical.
  std::vector<CandidateCycle> candidates;
  std::set<std::vector<int>> seen_edge_sets;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::vector<int> parent_edge(static_cast<std::size_t>(n));
  for (int root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(root)] = 0;
    parent[static_cast<std::size_t>(root)] = -1;
    std::deque<int> q{root};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (const auto& nb : mol.neighbors(v)) {
        if (dist[static_cast<std::size_t>(nb.atom)] == -1) {
          dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(v)] + 1;
          parent[static_cast<std::size_t>(nb.atom)] = v;
          parent_edge[static_cast<std::size_t>(nb.atom)] = nb.bond;
          q.push_back(nb.atom);
        }
      }
    }
    for (int be = 0; be < m; ++be) {
      const Bond& bond = mol.bonds()[static_cast<std::size_t>(be)];
      int x = bond.a, y = bond.b;
      if (dist[static_cast<std::size_t>(x)] < 0 || dist[static_cast<std::size_t>(y)] < 0) continue;
      // Walk both paths back to the root; require disjointness except root.
      auto path_of = [&](int t) {
        std::vector<int> atoms_path, edges_path;
        while (t != root) {
          atoms_path.push_back(t);
          edges_path.push_back(parent_edge[static_cast<std::size_t>(t)]);
          t = parent[static_cast<std::size_t>(t)];
        }
        atoms_path.push_back(root);
        return std::make_pair(atoms_path, edges_path);
      };
      auto [ax, ex] = path_of(x);  // x .. root
      auto [ay, ey] = path_of(y);  // y .. root
      std::vector<bool> on_x(static_cast<std::size_t>(n), false);
      for (int a : ax) on_x[static_cast<std::size_t>(a)] = true;
      bool disjoint = true;
      for (int a : ay) {
        if (a != root && on_x[static_cast<std::size_t>(a)]) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;

      CandidateCycle c;
      // root .. x, then y .. (back toward root, excluding root itself)
      for (auto it = ax.rbegin(); it != ax.rend(); ++it) c.atoms.push_back(*it);
      for (std::size_t k = 0; k + 1 < ay.size(); ++k) c.atoms.push_back(ay[k]);
      c.edge_indices = ex;
      c.edge_indices.push_back(be);
      c.edge_indices.insert(c.edge_indices.end(), ey.begin(), ey.end());
      std::sort(c.edge_indices.begin(), c.edge_indices.end());
      if (c.atoms.size() < 3) continue;
      if (!seen_edge_sets.insert(c.edge_indices).second) continue;
      c.sorted_atoms = c.atoms;
      std::sort(c.sorted_atoms.begin(), c.sorted_atoms.end());
      candidates.push_back(std::move(c));
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const CandidateCycle& a, const CandidateCycle& b) {
    if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
    return a.sorted_atoms < b.sorted_atoms;
  });

  // Greedy GF(2) independence over edge incidence vectors.
  std::vector<std::pair<int, EdgeSet>> pivots;  // (pivot bit, reduced vector)
  std::vector<std::vector<int>> basis;
  for (const CandidateCycle& c : candidates) {
    EdgeSet v = make_edge_set(c.edge_indices, m);
    for (const auto& [pbit, pvec] : pivots) {
      if ((v[static_cast<std::size_t>(pbit) / 64] >> (pbit % 64)) & 1ull) xor_into(v, pvec);
    }
    if (is_zero(v)) continue;
    pivots.emplace_back(lowest_bit(v), std::move(v));
    basis.push_back(c.atoms);
    if (static_cast<int>(basis.size()) == rank_needed) break;
  }
  return basis;
}

int max_ring_size(const MoleculeGraph& mol) {
  int best = 0;
  for (const auto& cycle : minimum_cycle_basis(mol)) {
    best = std::max(best, static_cast<int>(cycle.size()));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Canonical order and key
// ---------------------------------------------------------------------------

namespace {

// Dense re-ranking of per-atom keys: identical keys share a rank, ranks are
// ordered by key.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  const std::size_t n = keys.size();
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  std::vector<int> ranks(n, 0);
  int r = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && keys[static_cast<std::size_t>(order[k])] != keys[static_cast<std::size_t>(order[k - 1])]) ++r;
    ranks[static_cast<std::size_t>(order[k])] = r;
  }
  return ranks;
}

int class_count(const std::vector<int>& ranks) {
  int c = 0;
  for (int r : ranks) c = std::max(c, r + 1);
  return c;
}

// Refine ranks by neighborhood signatures until the partition stabilizes.
std::vector<int> refine(const MoleculeGraph& mol, std::vector<int> ranks) {
  const int n = mol.atom_count();
  using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
  int classes = class_count(ranks);
  while (true) {
    std::vector<Sig> sigs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, int>> nbr;
      nbr.reserve(mol.neighbors(i).size());
      for (const auto& nb : mol.neighbors(i)) {
        nbr.emplace_back(nb.order, ranks[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(nbr.begin(), nbr.end());
      sigs[static_cast<std::size_t>(i)] = {ranks[static_cast<std::size_t>(i)], std::move(nbr)};
    }
    std::vector<int> next = dense_ranks(sigs);
    int next_classes = class_count(next);
    if (next_classes == classes) return next;
    ranks = std::move(next);
    classes = next_classes;
  }
}

std::vector<int> initial_ranks(const MoleculeGraph& mol) {
  const int n = mol.atom_count();
  using Key = std::tuple<int, int, int, int, std::vector<int>>;
  std::vector<Key> keys(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    std::vector<int> orders;
    for (const auto& nb : mol.neighbors(i)) orders.push_back(nb.order);
    std::sort(orders.begin(), orders.end());
    keys[static_cast<std::size_t>(i)] = {static_cast<int>(a.element), a.charge, a.implicit_h,
                                         mol.degree(i), std::move(orders)};
  }
  return dense_ranks(keys);
}

std::string serialize_with_ranks(const MoleculeGraph& mol, const std::vector<int>& ranks) {
  const int n = mol.atom_count();
  std::vector<int> perm(static_cast<std::size_t>(n));  // rank -> atom
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(ranks[static_cast<std::size_t>(i)])] = i;
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * 4 + mol.bonds().size() * 6 + 8);
  out.push_back(static_cast<char>(n & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  for (int r = 0; r < n; ++r) {
    const Atom& a = mol.atom(perm[static_cast<std::size_t>(r)]);
    out.push_back(static_cast<char>(a.element));
    out.push_back(static_cast<char>(a.charge + 8));
    out.push_back(static_cast<char>(a.implicit_h));
  }
  std::vector<std::tuple<int, int, int>> bonds;
  bonds.reserve(mol.bonds().size());
  for (const Bond& b : mol.bonds()) {
    int ra = ranks[static_cast<std::size_t>(b.a)];
    int rb = ranks[static_cast<std::size_t>(b.b)];
    bonds.emplace_back(std::min(ra, rb), std::max(ra, rb), b.order);
  }
  std::sort(bonds.begin(), bonds.end());
  for (const auto& [ra, rb, order] : bonds) {
    out.push_back(static_cast<char>(ra & 0xff));
    out.push_back(static_cast<char>((ra >> 8) & 0xff));
    out.push_back(static_cast<char>(rb & 0xff));
    out.push_back(static_cast<char>((rb >> 8) & 0xff));
    out.push_back(static_cast<char>(order));
  }
  return out;
}

struct CanonicalSearch {
  explicit CanonicalSearch(const MoleculeGraph& m) : mol(m) {}

  const MoleculeGraph& mol;
  std::string best;
  std::vector<int> best_ranks;
  bool have_best = false;

  void visit(std::vector<int> ranks) {
    ranks = refine(mol, std::move(ranks));
    const int n = mol.atom_count();
    if (class_count(ranks) == n) {
      std::string s = serialize_with_ranks(mol, ranks);
      if (!have_best || s < best) {
        best = std::move(s);
        best_ranks = std::move(ranks);
        have_best = true;
      }
      return;
    }
    // Branch over the first class that still holds more than one atom.
    int target_class = -1;
    std::vector<int> members;
    for (int c = 0;; ++c) {
      members.clear();
      for (int i = 0; i < n; ++i) {
        if (ranks[static_cast<std::size_t>(i)] == c) members.push_back(i);
      }
      if (members.size() > 1) {
        target_class = c;
        break;
      }
    }
    for (int atom : members) {
      std::vector<int> split(ranks);
      for (int i = 0; i < n; ++i) {
        if (split[static_cast<std::size_t>(i)] > target_class) ++split[static_cast<std::size_t>(i)];
      }
      for (int other : members) {
        if (other != atom) ++split[static_cast<std::size_t>(other)];
      }
      visit(std::move(split));
    }
  }
};

}  // namespace

std::vector<int> canonical_order(const MoleculeGraph& mol) {
  const int n = mol.atom_count();
  if (n == 0) return {};
  CanonicalSearch search(mol);
  search.visit(initial_ranks(mol));
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    perm[static_cast<std::size_t>(search.best_ranks[static_cast<std::size_t>(i)])] = i;
  }
  return perm;
}

std::string canonical_key(const MoleculeGraph& mol) {
  const int n = mol.atom_count();
  util::Fnv1a h;
  if (n == 0) {
    h.str("empty");
    return util::hex64(h.value());
  }
  CanonicalSearch search(mol);
  search.visit(initial_ranks(mol));
  h.str(search.best);
  return util::hex64(h.value());
}

}  // namespace molga::chem
