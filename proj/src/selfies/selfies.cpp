#include "molga/selfies/selfies.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace molga::selfies {

namespace {

Symbol atom_symbol(std::string token, chem::Element element, int order) {
  Symbol s;
  s.token = std::move(token);
  s.kind = SymbolKind::Atom;
  s.element = element;
  s.order = order;
  return s;
}

Symbol marker_symbol(std::string token, SymbolKind kind, int digits, int order) {
  Symbol s;
  s.token = std::move(token);
  s.kind = kind;
  s.digits = digits;
  s.order = order;
  return s;
}

}  // namespace

Alphabet::Alphabet(std::vector<Symbol> symbols, int max_length)
    : symbols_(std::move(symbols)), max_length_(max_length) {
  if (symbols_.empty()) throw std::invalid_argument("alphabet is empty");
  if (max_length_ <= 0) throw std::invalid_argument("max_length must be positive");
  std::map<std::string_view, int> seen;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    Symbol& s = symbols_[i];
    s.digit_value = static_cast<int>(i % 16);
    if (!seen.emplace(s.token, static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate alphabet token " + s.token);
    }
    if (s.kind == SymbolKind::Atom) {
      if (s.order < 1 || s.order > 3) throw std::invalid_argument("atom order out of range: " + s.token);
    } else {
      if (s.digits < 1 || s.digits > 2) throw std::invalid_argument("digit count out of range: " + s.token);
      if (s.order < 1 || s.order > 3) throw std::invalid_argument("marker order out of range: " + s.token);
    }
  }
}

Alphabet Alphabet::builtin_default() {
  using E = chem::Element;
  std::vector<Symbol> symbols;
  symbols.push_back(atom_symbol("[C]", E::C, 1));
  symbols.push_back(atom_symbol("[=C]", E::C, 2));
  symbols.push_back(atom_symbol("[#C]", E::C, 3));
  symbols.push_back(atom_symbol("[O]", E::O, 1));
  symbols.push_back(atom_symbol("[=O]", E::O, 2));
  symbols.push_back(atom_symbol("[N]", E::N, 1));
  symbols.push_back(atom_symbol("[=N]", E::N, 2));
  symbols.push_back(atom_symbol("[#N]", E::N, 3));
  symbols.push_back(atom_symbol("[F]", E::F, 1));
  symbols.push_back(atom_symbol("[S]", E::S, 1));
  symbols.push_back(atom_symbol("[=S]", E::S, 2));
  symbols.push_back(atom_symbol("[P]", E::P, 1));
  symbols.push_back(atom_symbol("[Cl]", E::Cl, 1));
  symbols.push_back(atom_symbol("[Br]", E::Br, 1));
  symbols.push_back(marker_symbol("[Branch1_1]", SymbolKind::Branch, 1, 1));
  symbols.push_back(marker_symbol("[Branch1_2]", SymbolKind::Branch, 1, 2));
  symbols.push_back(marker_symbol("[Branch1_3]", SymbolKind::Branch, 1, 3));
  symbols.push_back(marker_symbol("[Branch2_1]", SymbolKind::Branch, 2, 1));
  symbols.push_back(marker_symbol("[Branch2_2]", SymbolKind::Branch, 2, 2));
  symbols.push_back(marker_symbol("[Ring1]", SymbolKind::Ring, 1, 1));
  symbols.push_back(marker_symbol("[Ring2]", SymbolKind::Ring, 2, 1));
  return Alphabet(std::move(symbols), 81);
}

Alphabet Alphabet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alphabet file: " + path);
  nlohmann::json j;
  in >> j;
  int max_length = j.value("max_length", 81);
  std::vector<Symbol> symbols;
  for (const auto& e : j.at("symbols")) {
    std::string token = e.at("token").get<std::string>();
    std::string kind = e.at("kind").get<std::string>();
    if (kind == "atom") {
      auto element = chem::element_from_symbol(e.at("element").get<std::string>());
      if (!element) throw std::runtime_error("unsupported element in alphabet: " + token);
      symbols.push_back(atom_symbol(std::move(token), *element, e.value("order", 1)));
    } else if (kind == "branch" || kind == "ring") {
      symbols.push_back(marker_symbol(std::move(token),
                                      kind == "branch" ? SymbolKind::Branch : SymbolKind::Ring,
                                      e.at("digits").get<int>(), e.value("order", 1)));
    } else {
      throw std::runtime_error("unknown symbol kind '" + kind + "' for " + token);
    }
  }
  return Alphabet(std::move(symbols), max_length);
}

std::optional<int> Alphabet::index_of(std::string_view token) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].token == token) return static_cast<int>(i);
  }
  return std::nullopt;
}

SelfiesString SelfiesString::parse(std::string_view text, const Alphabet& alphabet) {
  std::vector<int> indices;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] != '[') {
      throw std::invalid_argument("expected '[' at position " + std::to_string(pos));
    }
    std::size_t end = text.find(']', pos);
    if (end == std::string_view::npos) {
      throw std::invalid_argument("unterminated token at position " + std::to_string(pos));
    }
    std::string_view token = text.substr(pos, end - pos + 1);
    auto idx = alphabet.index_of(token);
    if (!idx) throw std::invalid_argument("unknown token " + std::string(token));
    indices.push_back(*idx);
    pos = end + 1;
  }
  return from_indices(std::move(indices), alphabet);
}

SelfiesString SelfiesString::from_indices(std::vector<int> indices, const Alphabet& alphabet) {
  if (static_cast<int>(indices.size()) > alphabet.max_length()) {
    throw std::invalid_argument("string exceeds maximum length " +
                                std::to_string(alphabet.max_length()));
  }
  for (int idx : indices) {
    if (idx < 0 || idx >= alphabet.size()) {
      throw std::invalid_argument("symbol index out of range: " + std::to_string(idx));
    }
  }
  return SelfiesString(std::move(indices));
}

std::string SelfiesString::text(const Alphabet& alphabet) const {
  std::string out;
  for (int idx : indices_) out += alphabet.symbol(idx).token;
  return out;
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

namespace {

struct Derivation {
  const Alphabet& alphabet;
  std::vector<chem::MoleculeGraph::AtomSpec> atoms;
  std::vector<chem::Bond> bonds;
  std::vector<int> remaining;  // unspent valence per placed atom

  explicit Derivation(const Alphabet& a) : alphabet(a) {}

  // Reads marker digits MSB-first; nullopt when the scope runs out of
  // symbols, which ends the scope.
  std::optional<int> read_digits(const std::vector<int>& symbols, std::size_t& pos,
                                 std::size_t end, int count) const {
    if (pos + static_cast<std::size_t>(count) > end) {
      pos = end;
      return std::nullopt;
    }
    int q = 0;
    for (int i = 0; i < count; ++i) {
      q = q * 16 + alphabet.symbol(symbols[pos++]).digit_value;
    }
    return q;
  }

  // Derives symbols[pos, end) attached to `current` (-1: no attachment yet).
  // first_order_cap limits the first bond formed in this scope (branch
  // marker semantics); passing 3 means no extra cap.
  void derive(const std::vector<int>& symbols, std::size_t pos, std::size_t end, int current,
              int first_order_cap) {
    int cap = first_order_cap;
    while (pos < end) {
      const Symbol& sym = alphabet.symbol(symbols[pos++]);
      switch (sym.kind) {
        case SymbolKind::Atom: {
          int max_new = chem::max_valence(sym.element);
          if (current < 0) {
            atoms.push_back({sym.element, 0});
            remaining.push_back(max_new);
            current = static_cast<int>(atoms.size()) - 1;
            cap = 3;
            break;
          }
          if (remaining[static_cast<std::size_t>(current)] == 0) return;  // chain exhausted
          int order = std::min(std::min(sym.order, cap),
                               std::min(remaining[static_cast<std::size_t>(current)], max_new));
          atoms.push_back({sym.element, 0});
          int added = static_cast<int>(atoms.size()) - 1;
          bonds.push_back({current, added, order});
          remaining[static_cast<std::size_t>(current)] -= order;
          remaining.push_back(max_new - order);
          current = added;
          cap = 3;
          break;
        }
        case SymbolKind::Branch: {
          auto q = read_digits(symbols, pos, end, sym.digits);
          if (!q) return;
          std::size_t content_end = std::min(end, pos + static_cast<std::size_t>(*q) + 1);
          if (current >= 0 && remaining[static_cast<std::size_t>(current)] > 0) {
            derive(symbols, pos, content_end, current, sym.order);
          }
          pos = content_end;  // branch content is consumed even when skipped
          break;
        }
        case SymbolKind::Ring: {
          auto q = read_digits(symbols, pos, end, sym.digits);
          if (!q) return;
          if (current < 0) break;
          int target = std::max(0, current - (*q + 1));
          if (target == current) break;
          bool exists = false;
          for (const chem::Bond& b : bonds) {
            if ((b.a == target && b.b == current) || (b.a == current && b.b == target)) {
              exists = true;
              break;
            }
          }
          if (exists) break;
          int order = std::min(sym.order, std::min(remaining[static_cast<std::size_t>(current)],
                                                   remaining[static_cast<std::size_t>(target)]));
          if (order < 1) break;
          bonds.push_back({target, current, order});
          remaining[static_cast<std::size_t>(current)] -= order;
          remaining[static_cast<std::size_t>(target)] -= order;
          break;
        }
      }
    }
  }
};

}  // namespace

chem::MoleculeGraph decode(const SelfiesString& s, const Alphabet& alphabet) {
  Derivation d(alphabet);
  d.derive(s.indices(), 0, s.indices().size(), -1, 3);
  if (d.atoms.empty()) return chem::MoleculeGraph::methane();
  return chem::MoleculeGraph(d.atoms, d.bonds);
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

namespace {

struct Encoder {
  const chem::MoleculeGraph& mol;
  const Alphabet& alphabet;

  // tree[u] = children in emission order; filled per root attempt.
  std::vector<std::vector<int>> tree;
  std::vector<std::vector<int>> tree_adj_;      // undirected spanning tree
  std::vector<int> parent_order;       // bond order to parent
  std::vector<int> pre_order;          // pre[atom] = placement index
  std::vector<std::pair<int, int>> ring_edges;  // non-tree (a, b) with a,b atom ids

  Encoder(const chem::MoleculeGraph& m, const Alphabet& a) : mol(m), alphabet(a) {}

  int atom_token(chem::Element element, int order, bool is_root) const {
    int fallback = -1;
    for (int i = 0; i < alphabet.size(); ++i) {
      const Symbol& s = alphabet.symbol(i);
      if (s.kind != SymbolKind::Atom || s.element != element) continue;
      if (s.order == order) return i;
      if (is_root && (fallback < 0 || s.order < alphabet.symbol(fallback).order)) fallback = i;
    }
    return is_root ? fallback : -1;  // root atoms form no bond; any order works
  }

  int digit_token(int value) const {
    for (int i = 0; i < alphabet.size(); ++i) {
      if (alphabet.symbol(i).digit_value == value) return i;
    }
    return -1;
  }

  // Smallest usable marker of `kind`: enough digit capacity for q and (for
  // branches) an order cap >= `order`; rings need exact order match since
  // their order is not clipped by an atom symbol.
  int marker_token(SymbolKind kind, int q, int order) const {
    int best = -1;
    for (int i = 0; i < alphabet.size(); ++i) {
      const Symbol& s = alphabet.symbol(i);
      if (s.kind != kind) continue;
      if (q >= (s.digits == 1 ? 16 : 256)) continue;
      if (kind == SymbolKind::Branch && s.order < order) continue;
      if (kind == SymbolKind::Ring && s.order != order) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      const Symbol& b = alphabet.symbol(best);
      if (s.digits < b.digits || (s.digits == b.digits && s.order < b.order)) best = i;
    }
    return best;
  }

  bool append_digits(std::vector<int>& out, int q, int digits) const {
    for (int d = digits - 1; d >= 0; --d) {
      int tok = digit_token((q >> (4 * d)) & 0xf);
      if (tok < 0) return false;
      out.push_back(tok);
    }
    return true;
  }

  // Kruskal over bonds sorted by descending order then index pair; returns
  // tree adjacency and the leftover ring-closure edges.
  void build_spanning_tree() {
    const int n = mol.atom_count();
    std::vector<int> comp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(i)] = i;
    auto find = [&](int x) {
      while (comp[static_cast<std::size_t>(x)] != x) {
        comp[static_cast<std::size_t>(x)] = comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(x)])];
        x = comp[static_cast<std::size_t>(x)];
      }
      return x;
    };
    std::vector<int> order(static_cast<std::size_t>(mol.bond_count()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const chem::Bond& bx = mol.bonds()[static_cast<std::size_t>(x)];
      const chem::Bond& by = mol.bonds()[static_cast<std::size_t>(y)];
      if (bx.order != by.order) return bx.order > by.order;
      return std::pair(bx.a, bx.b) < std::pair(by.a, by.b);
    });
    tree_adj_.assign(static_cast<std::size_t>(n), {});
    ring_edges.clear();
    for (int bi : order) {
      const chem::Bond& b = mol.bonds()[static_cast<std::size_t>(bi)];
      int ra = find(b.a), rb = find(b.b);
      if (ra == rb) {
        ring_edges.emplace_back(b.a, b.b);
        continue;
      }
      comp[static_cast<std::size_t>(ra)] = rb;
      tree_adj_[static_cast<std::size_t>(b.a)].push_back(b.b);
      tree_adj_[static_cast<std::size_t>(b.b)].push_back(b.a);
    }
    for (auto& nbrs : tree_adj_) std::sort(nbrs.begin(), nbrs.end());
    std::sort(ring_edges.begin(), ring_edges.end());
  }

  // Orients the tree from `root` and assigns pre-order placement indices.
  // Returns the atom whose parent-edge order has no atom token, or -1.
  int orient(int root) {
    const int n = mol.atom_count();
    tree.assign(static_cast<std::size_t>(n), {});
    parent_order.assign(static_cast<std::size_t>(n), 0);
    pre_order.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> stack{root};
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    int counter = 0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      pre_order[static_cast<std::size_t>(u)] = counter++;
      // Children in ascending index; stack reversal keeps pre-order aligned
      // with emission order.
      std::vector<int> kids;
      for (int v : tree_adj_[static_cast<std::size_t>(u)]) {
        if (v != parent[static_cast<std::size_t>(u)]) kids.push_back(v);
      }
      tree[static_cast<std::size_t>(u)] = kids;
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
        parent[static_cast<std::size_t>(*it)] = u;
        parent_order[static_cast<std::size_t>(*it)] = mol.bond_order_between(u, *it);
        stack.push_back(*it);
      }
    }
    for (int v = 0; v < n; ++v) {
      if (v == root) continue;
      if (atom_token(mol.atom(v).element, parent_order[static_cast<std::size_t>(v)], false) < 0) {
        return v;
      }
    }
    return -1;
  }

  // Emits the subtree rooted at u. Returns false on digit/marker/length
  // trouble, with `why` set.
  bool emit(int u, bool is_root, std::vector<int>& out, std::string& why) const {
    int tok = atom_token(mol.atom(u).element, is_root ? 1 : parent_order[static_cast<std::size_t>(u)], is_root);
    if (tok < 0) {
      why = "no atom token for atom " + std::to_string(u);
      return false;
    }
    out.push_back(tok);
    // Ring closures for which u is the later endpoint, nearest target first.
    std::vector<std::pair<int, int>> closures;  // (target pre, order)
    for (const auto& [a, b] : ring_edges) {
      int other = -1;
      if (a == u) other = b;
      if (b == u) other = a;
      if (other < 0) continue;
      if (pre_order[static_cast<std::size_t>(other)] < pre_order[static_cast<std::size_t>(u)]) {
        closures.emplace_back(pre_order[static_cast<std::size_t>(other)],
                              mol.bond_order_between(u, other));
      }
    }
    std::sort(closures.begin(), closures.end(), std::greater<>());
    for (const auto& [target_pre, order] : closures) {
      int q = pre_order[static_cast<std::size_t>(u)] - target_pre - 1;
      int marker = marker_token(SymbolKind::Ring, q, order);
      if (marker < 0) {
        why = "no ring marker of order " + std::to_string(order) + " at atom " + std::to_string(u);
        return false;
      }
      out.push_back(marker);
      if (!append_digits(out, q, alphabet.symbol(marker).digits)) {
        why = "digit value not representable";
        return false;
      }
    }
    const auto& kids = tree[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int v = kids[k];
      if (k + 1 < kids.size()) {
        std::vector<int> content;
        if (!emit(v, false, content, why)) return false;
        int q = static_cast<int>(content.size()) - 1;
        int marker = marker_token(SymbolKind::Branch, q, parent_order[static_cast<std::size_t>(v)]);
        if (marker < 0) {
          why = "no branch marker for order " + std::to_string(parent_order[static_cast<std::size_t>(v)]) +
                " / length " + std::to_string(q + 1) + " at atom " + std::to_string(u);
          return false;
        }
        out.push_back(marker);
        if (!append_digits(out, q, alphabet.symbol(marker).digits)) {
          why = "digit value not representable";
          return false;
        }
        out.insert(out.end(), content.begin(), content.end());
      } else {
        if (!emit(v, false, out, why)) return false;
      }
    }
    return true;
  }
};

}  // namespace

SelfiesString encode(const chem::MoleculeGraph& mol, const Alphabet& alphabet) {
  if (mol.atom_count() == 0) throw std::runtime_error("cannot encode an empty molecule");
  if (!mol.connected()) throw std::runtime_error("cannot encode a disconnected molecule");
  for (int i = 0; i < mol.atom_count(); ++i) {
    if (mol.atom(i).charge != 0) {
      throw std::runtime_error("cannot encode formal charge at atom " + std::to_string(i));
    }
  }
  Encoder enc(mol, alphabet);
  enc.build_spanning_tree();
  std::string last_error = "no expressible traversal root";
  for (int root = 0; root < mol.atom_count(); ++root) {
    int bad = enc.orient(root);
    if (bad >= 0) {
      last_error = "no atom token for atom " + std::to_string(bad) + " with bond order " +
                   std::to_string(enc.parent_order[static_cast<std::size_t>(bad)]);
      continue;
    }
    std::vector<int> out;
    std::string why;
    if (!enc.emit(root, true, out, why)) {
      last_error = why;
      continue;
    }
    if (static_cast<int>(out.size()) > alphabet.max_length()) {
      last_error = "encoded string exceeds maximum length " + std::to_string(alphabet.max_length());
      continue;
    }
    return SelfiesString::from_indices(std::move(out), alphabet);
  }
  throw std::runtime_error("encoding failed: " + last_error);
}

SelfiesString random_selfies(util::Rng& rng, int length, const Alphabet& alphabet) {
  if (length < 0 || length > alphabet.max_length()) {
    throw std::invalid_argument("random_selfies length out of bounds: " + std::to_string(length));
  }
  std::vector<int> indices(static_cast<std::size_t>(length));
  for (int& idx : indices) {
    idx = static_cast<int>(util::uniform_index(rng, static_cast<std::uint64_t>(alphabet.size())));
  }
  return SelfiesString::from_indices(std::move(indices), alphabet);
}

}  // namespace molga::selfies
