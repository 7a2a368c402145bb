#include "molga/smiles/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

namespace molga::smiles {

namespace {

struct ParsedAtom {
  chem::Element element = chem::Element::C;
  int charge = 0;
  bool aromatic = false;
  int declared_h = -1;  // -1: unbracketed, hydrogens saturate
  std::size_t offset = 0;
};

struct ParsedBond {
  int a = 0;
  int b = 0;
  int order = 0;  // 0: unspecified in the input
};

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::vector<ParsedAtom> atoms;
  std::vector<ParsedBond> bonds;

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(pos, reason); }

  bool eat(char c) {
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  // Organic-subset or bracket-interior element; two-letter symbols first.
  // Sets `aromatic` for lowercase input.
  std::optional<chem::Element> read_element(bool& aromatic) {
    static const std::pair<std::string_view, chem::Element> kTwo[] = {
        {"Cl", chem::Element::Cl}, {"Br", chem::Element::Br}};
    for (const auto& [sym, el] : kTwo) {
      if (text.substr(pos, 2) == sym) {
        pos += 2;
        aromatic = false;
        return el;
      }
    }
    static const std::pair<char, chem::Element> kOne[] = {
        {'C', chem::Element::C}, {'N', chem::Element::N}, {'O', chem::Element::O},
        {'F', chem::Element::F}, {'S', chem::Element::S}, {'P', chem::Element::P}};
    for (const auto& [sym, el] : kOne) {
      if (peek() == sym) {
        ++pos;
        aromatic = false;
        return el;
      }
      if (peek() == static_cast<char>(sym + 32) && sym != 'F') {  // aromatic c,n,o,s,p
        ++pos;
        aromatic = true;
        return el;
      }
    }
    return std::nullopt;
  }

  int read_int(int fallback) {
    if (!std::isdigit(static_cast<unsigned char>(peek()))) return fallback;
    int v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (text[pos++] - '0');
    return v;
  }

  // Bracket atom: [element(H count)?(charge)?]. Isotopes, stereo marks and
  // atom maps are out of the subset and rejected.
  int parse_bracket_atom() {
    std::size_t start = pos;
    ++pos;  // '['
    if (std::isdigit(static_cast<unsigned char>(peek()))) fail("isotope specifications unsupported");
    bool aromatic = false;
    auto element = read_element(aromatic);
    if (!element) fail("unsupported element in bracket atom");
    ParsedAtom atom;
    atom.element = *element;
    atom.aromatic = aromatic;
    atom.declared_h = 0;
    atom.offset = start;
    if (eat('H')) atom.declared_h = read_int(1);
    if (peek() == '+' || peek() == '-') {
      char sign = text[pos++];
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = read_int(1);
      } else {
        while (eat(sign)) ++magnitude;
      }
      atom.charge = sign == '+' ? magnitude : -magnitude;
      if (std::abs(atom.charge) > 3) fail("charge magnitude out of range");
    }
    if (!eat(']')) fail("unsupported bracket feature (expected ']')");
    atoms.push_back(atom);
    return static_cast<int>(atoms.size()) - 1;
  }

  int parse_plain_atom() {
    std::size_t start = pos;
    bool aromatic = false;
    auto element = read_element(aromatic);
    if (!element) fail("unsupported atom");
    ParsedAtom atom;
    atom.element = *element;
    atom.aromatic = aromatic;
    atom.offset = start;
    atoms.push_back(atom);
    return static_cast<int>(atoms.size()) - 1;
  }

  void add_bond(int a, int b, int order) {
    if (a == b) fail("ring closure bonds an atom to itself");
    for (const ParsedBond& pb : bonds) {
      if ((pb.a == a && pb.b == b) || (pb.a == b && pb.b == a)) fail("duplicate bond");
    }
    bonds.push_back({a, b, order});
  }

  void run() {
    int prev = -1;
    int pending = 0;  // 0: no explicit bond symbol queued
    bool have_pending = false;
    std::vector<int> branch_stack;
    std::map<int, std::pair<int, int>> open_rings;  // number -> (atom, explicit order)

    while (pos < text.size()) {
      char c = peek();
      if (c == '-' || c == '=' || c == '#') {
        if (have_pending) fail("two consecutive bond symbols");
        pending = c == '-' ? 1 : c == '=' ? 2 : 3;
        have_pending = true;
        ++pos;
        continue;
      }
      if (c == ':') fail("explicit aromatic bonds unsupported");
      if (c == '.') fail("disconnected components unsupported");
      if (c == '(') {
        if (prev < 0) fail("branch before any atom");
        if (have_pending) fail("bond symbol before '('");
        branch_stack.push_back(prev);
        ++pos;
        continue;
      }
      if (c == ')') {
        if (branch_stack.empty()) fail("unmatched ')'");
        if (have_pending) fail("dangling bond before ')'");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        if (prev < 0) fail("ring closure before any atom");
        int number;
        if (c == '%') {
          ++pos;
          if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digits after '%'");
          char d1 = text[pos++];
          if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected two digits after '%'");
          char d2 = text[pos++];
          number = (d1 - '0') * 10 + (d2 - '0');
        } else {
          number = c - '0';
          ++pos;
        }
        int explicit_order = have_pending ? pending : 0;
        have_pending = false;
        pending = 0;
        auto it = open_rings.find(number);
        if (it == open_rings.end()) {
          open_rings[number] = {prev, explicit_order};
        } else {
          auto [other, other_order] = it->second;
          open_rings.erase(it);
          if (explicit_order && other_order && explicit_order != other_order) {
            fail("conflicting ring closure bond orders");
          }
          add_bond(other, prev, std::max(explicit_order, other_order));
        }
        continue;
      }
      int atom;
      if (c == '[') {
        atom = parse_bracket_atom();
      } else {
        atom = parse_plain_atom();
      }
      if (prev >= 0) {
        add_bond(prev, atom, have_pending ? pending : 0);
      } else if (have_pending) {
        fail("bond symbol before the first atom");
      }
      have_pending = false;
      pending = 0;
      prev = atom;
    }
    if (atoms.empty()) fail("empty SMILES");
    if (have_pending) fail("dangling bond at end of input");
    if (!branch_stack.empty()) fail("unclosed branch");
    if (!open_rings.empty()) fail("unclosed ring closure");
  }
};

// Kekulization: decide which input bonds become double so that every
// aromatic atom's valence works out. Backtracking exact cover of the
// atoms that need one double bond each.
struct Kekulizer {
  const std::vector<ParsedAtom>& atoms;
  std::vector<ParsedBond>& bonds;
  std::size_t error_offset;

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(error_offset, reason); }

  void kekulize() {
    const int n = static_cast<int>(atoms.size());
    // Ring perception on the all-single trial graph.
    std::vector<chem::MoleculeGraph::AtomSpec> specs;
    specs.reserve(atoms.size());
    for (const ParsedAtom& a : atoms) specs.push_back({a.element, a.charge});
    std::vector<chem::Bond> trial;
    trial.reserve(bonds.size());
    for (const ParsedBond& b : bonds) trial.push_back({b.a, b.b, std::max(1, b.order)});
    chem::MoleculeGraph graph(specs, trial);

    std::vector<int> candidate_bonds;
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      const ParsedBond& b = bonds[i];
      if (b.order != 0) continue;
      if (!atoms[static_cast<std::size_t>(b.a)].aromatic ||
          !atoms[static_cast<std::size_t>(b.b)].aromatic) {
        continue;
      }
      // Aromatic-aromatic bonds outside any ring (e.g. biphenyl linkage)
      // stay single.
      if (graph.bond_in_ring(static_cast<int>(i))) candidate_bonds.push_back(static_cast<int>(i));
    }

    // A double bond is needed where the charge-adjusted valence is not yet
    // filled by sigma bonds plus hydrogens; aromatic O/S donate a lone pair
    // instead and never take one.
    std::vector<int> needs(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const ParsedAtom& a = atoms[static_cast<std::size_t>(i)];
      if (!a.aromatic) continue;
      if (a.element == chem::Element::O || a.element == chem::Element::S) continue;
      int sigma = 0;
      for (const ParsedBond& b : bonds) {
        if (b.a == i || b.b == i) sigma += std::max(1, b.order);
      }
      int h = std::max(0, a.declared_h);
      int slack = chem::max_valence(a.element, a.charge) - sigma - h;
      needs[static_cast<std::size_t>(i)] = std::clamp(slack, 0, 1);
    }

    std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
    for (int bi : candidate_bonds) {
      incident[static_cast<std::size_t>(bonds[static_cast<std::size_t>(bi)].a)].push_back(bi);
      incident[static_cast<std::size_t>(bonds[static_cast<std::size_t>(bi)].b)].push_back(bi);
    }
    std::vector<int> chosen;
    std::vector<int> covered(static_cast<std::size_t>(n), 0);
    if (!match(0, needs, incident, covered, chosen)) fail("kekulization failed");
    std::set<int> doubles(chosen.begin(), chosen.end());
    for (int bi : candidate_bonds) {
      bonds[static_cast<std::size_t>(bi)].order = doubles.count(bi) ? 2 : 1;
    }
  }

  bool match(int atom, const std::vector<int>& needs, const std::vector<std::vector<int>>& incident,
             std::vector<int>& covered, std::vector<int>& chosen) {
    const int n = static_cast<int>(atoms.size());
    while (atom < n && (needs[static_cast<std::size_t>(atom)] == 0 || covered[static_cast<std::size_t>(atom)])) {
      ++atom;
    }
    if (atom == n) return true;
    for (int bi : incident[static_cast<std::size_t>(atom)]) {
      const ParsedBond& b = bonds[static_cast<std::size_t>(bi)];
      int other = b.a == atom ? b.b : b.a;
      if (needs[static_cast<std::size_t>(other)] == 0 || covered[static_cast<std::size_t>(other)]) continue;
      covered[static_cast<std::size_t>(atom)] = covered[static_cast<std::size_t>(other)] = 1;
      chosen.push_back(bi);
      if (match(atom + 1, needs, incident, covered, chosen)) return true;
      chosen.pop_back();
      covered[static_cast<std::size_t>(atom)] = covered[static_cast<std::size_t>(other)] = 0;
    }
    return false;
  }
};

}  // namespace

chem::MoleculeGraph parse_smiles(std::string_view text) {
  Parser parser;
  parser.text = text;
  parser.run();

  bool any_aromatic = false;
  for (const ParsedAtom& a : parser.atoms) any_aromatic |= a.aromatic;
  if (any_aromatic) {
    Kekulizer k{parser.atoms, parser.bonds, text.size()};
    k.kekulize();
  }

  std::vector<chem::MoleculeGraph::AtomSpec> specs;
  specs.reserve(parser.atoms.size());
  for (const ParsedAtom& a : parser.atoms) specs.push_back({a.element, a.charge});
  std::vector<chem::Bond> final_bonds;
  final_bonds.reserve(parser.bonds.size());
  for (const ParsedBond& b : parser.bonds) final_bonds.push_back({b.a, b.b, std::max(1, b.order)});
  chem::MoleculeGraph mol(specs, final_bonds);

  auto verdict = chem::validate(mol);
  if (!verdict.ok()) {
    const auto& v = verdict.violations.front();
    throw ParseError(parser.atoms[static_cast<std::size_t>(v.atom)].offset, v.message);
  }
  for (std::size_t i = 0; i < parser.atoms.size(); ++i) {
    const ParsedAtom& a = parser.atoms[i];
    if (a.declared_h >= 0 && a.declared_h != mol.atom(static_cast<int>(i)).implicit_h) {
      throw ParseError(a.offset, "bracket hydrogen count " + std::to_string(a.declared_h) +
                                     " conflicts with the saturation convention (expected " +
                                     std::to_string(int(mol.atom(static_cast<int>(i)).implicit_h)) + ")");
    }
  }
  return mol;
}

namespace {

std::string atom_text(const chem::Atom& atom) {
  std::string symbol(chem::element_symbol(atom.element));
  if (atom.charge == 0) return symbol;
  std::string out = "[" + symbol;
  if (atom.implicit_h == 1) {
    out += "H";
  } else if (atom.implicit_h > 1) {
    out += "H" + std::to_string(int(atom.implicit_h));
  }
  int magnitude = std::abs(atom.charge);
  out += atom.charge > 0 ? '+' : '-';
  if (magnitude > 1) out += std::to_string(magnitude);
  return out + "]";
}

std::string ring_digit(int number) {
  if (number <= 9) return std::to_string(number);
  return "%" + std::to_string(number);
}

const char* bond_text(int order) { return order == 2 ? "=" : order == 3 ? "#" : ""; }

struct Writer {
  const chem::MoleculeGraph& mol;
  std::vector<int> rank;  // atom -> canonical rank
  std::vector<std::vector<int>> children;
  // closures[atom] = (ring number, bond order, opens here?)
  std::vector<std::vector<std::tuple<int, int, bool>>> closures;

  explicit Writer(const chem::MoleculeGraph& m) : mol(m) {}

  void plan(int root) {
    const int n = mol.atom_count();
    children.assign(static_cast<std::size_t>(n), {});
    closures.assign(static_cast<std::size_t>(n), {});
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    std::set<std::pair<int, int>> used;  // tree + closed edges, by atom pair
    int next_number = 1;
    // Recursive DFS in canonical-rank order of neighbors.
    auto visit = [&](auto&& self, int u) -> void {
      visited[static_cast<std::size_t>(u)] = true;
      std::vector<std::pair<int, int>> ordered;  // (rank, atom)
      for (const auto& nb : mol.neighbors(u)) {
        ordered.emplace_back(rank[static_cast<std::size_t>(nb.atom)], nb.atom);
      }
      std::sort(ordered.begin(), ordered.end());
      for (const auto& [r, v] : ordered) {
        (void)r;
        auto key = std::minmax(u, v);
        if (used.count({key.first, key.second})) continue;
        if (visited[static_cast<std::size_t>(v)]) {
          int number = next_number++;
          int order = mol.bond_order_between(u, v);
          closures[static_cast<std::size_t>(v)].emplace_back(number, order, true);
          closures[static_cast<std::size_t>(u)].emplace_back(number, order, false);
          used.insert({key.first, key.second});
        } else {
          used.insert({key.first, key.second});
          children[static_cast<std::size_t>(u)].push_back(v);
          self(self, v);
        }
      }
    };
    visit(visit, root);
  }

  void emit(int u, std::string& out) const {
    out += atom_text(mol.atom(u));
    // Closing digits (with the bond symbol) precede opening digits.
    for (const auto& [number, order, opener] : closures[static_cast<std::size_t>(u)]) {
      if (!opener) out += std::string(bond_text(order)) + ring_digit(number);
    }
    for (const auto& [number, order, opener] : closures[static_cast<std::size_t>(u)]) {
      if (opener) out += ring_digit(number);
    }
    const auto& kids = children[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int v = kids[k];
      std::string bond = bond_text(mol.bond_order_between(u, v));
      if (k + 1 < kids.size()) {
        out += "(" + bond;
        emit(v, out);
        out += ")";
      } else {
        out += bond;
        emit(v, out);
      }
    }
  }
};

}  // namespace

std::string write_smiles(const chem::MoleculeGraph& mol) {
  if (mol.atom_count() == 0) throw std::invalid_argument("cannot write an empty molecule");
  if (!mol.connected()) throw std::invalid_argument("cannot write a disconnected molecule");
  std::vector<int> order = chem::canonical_order(mol);
  Writer w(mol);
  w.rank.assign(static_cast<std::size_t>(mol.atom_count()), 0);
  for (int r = 0; r < mol.atom_count(); ++r) {
    w.rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
  }
  w.plan(order[0]);
  std::string out;
  w.emit(order[0], out);
  return out;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset ds;
  ds.source_path = path;
  std::string line;
  int line_number = 0;
  int records = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t stop = line.find_first_of(" \t\r", start);
    std::string smiles = line.substr(start, stop == std::string::npos ? stop : stop - start);
    ++records;
    try {
      DatasetEntry entry{parse_smiles(smiles), smiles};
      ds.entries.push_back(std::move(entry));
    } catch (const std::exception& e) {
      ds.skip_log.push_back({line_number, smiles, e.what()});
    }
  }
  if (records == 0) throw std::runtime_error("dataset file has no records: " + path);
  if (ds.skip_log.size() * 10 > static_cast<std::size_t>(records)) {
    throw std::runtime_error("more than 10% of dataset lines unparseable (" +
                             std::to_string(ds.skip_log.size()) + "/" + std::to_string(records) +
                             "): " + path);
  }
  return ds;
}

}  // namespace molga::smiles
