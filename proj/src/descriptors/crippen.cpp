#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "molga/descriptors/descriptors.hpp"

namespace molga::descriptors {

using chem::Element;
using chem::MoleculeGraph;

Aromaticity perceive_aromaticity(const MoleculeGraph& mol) {
  Aromaticity out;
  out.atoms.assign(static_cast<std::size_t>(mol.atom_count()), false);
  out.bonds.assign(static_cast<std::size_t>(mol.bond_count()), false);

  for (const auto& ring : chem::minimum_cycle_basis(mol)) {
    const int sz = static_cast<int>(ring.size());
    if (sz != 5 && sz != 6) continue;

    int pi = 0;
    bool capable = true;
    for (int idx = 0; idx < sz && capable; ++idx) {
      const int a = ring[static_cast<std::size_t>(idx)];
      const int prev = ring[static_cast<std::size_t>((idx + sz - 1) % sz)];
      const int next = ring[static_cast<std::size_t>((idx + 1) % sz)];
      const chem::Atom& atom = mol.atom(a);

      bool has_triple = false;
      bool in_ring_double = false;
      bool exo_double_c = false;
      bool exo_double_het = false;
      for (const auto& nb : mol.neighbors(a)) {
        if (nb.order == 3) has_triple = true;
        if (nb.order != 2) continue;
        if (nb.atom == prev || nb.atom == next) {
          in_ring_double = true;
        } else if (mol.atom(nb.atom).element == Element::C) {
          exo_double_c = true;
        } else {
          exo_double_het = true;
        }
      }

      if (has_triple) {
        capable = false;
      } else if (in_ring_double || exo_double_c) {
        pi += 1;
      } else if (exo_double_het) {
        pi += 0;
      } else {
        const Element e = atom.element;
        const bool lone_pair_donor =
            ((e == Element::N || e == Element::O || e == Element::S || e == Element::P) &&
             atom.charge <= 0) ||
            (e == Element::C && atom.charge < 0);
        if (lone_pair_donor) {
          pi += 2;
        } else {
          capable = false;
        }
      }
    }
    if (!capable || pi % 4 != 2) continue;

    for (int idx = 0; idx < sz; ++idx) {
      const int a = ring[static_cast<std::size_t>(idx)];
      const int next = ring[static_cast<std::size_t>((idx + 1) % sz)];
      out.atoms[static_cast<std::size_t>(a)] = true;
      for (const auto& nb : mol.neighbors(a)) {
        if (nb.atom == next) out.bonds[static_cast<std::size_t>(nb.bond)] = true;
      }
    }
  }
  return out;
}

namespace {

// Wildman-Crippen per-class logP contributions.
const std::map<std::string, double>& contribution_table() {
  static const std::map<std::string, double> table = {
      {"C1", 0.1441},  {"C2", 0.0},      {"C3", -0.2035}, {"C4", -0.2051}, {"C5", -0.2783},
      {"C6", 0.1551},  {"C7", 0.0017},   {"C8", 0.08452}, {"C9", -0.1444}, {"C10", -0.0516},
      {"C11", 0.1193}, {"C12", -0.0967}, {"C13", -0.5443}, {"C14", 0.0},   {"C15", 0.2450},
      {"C16", 0.1980}, {"C18", 0.1581},  {"C19", 0.2955}, {"C20", 0.2713}, {"C21", 0.1360},
      {"C22", 0.4619}, {"C23", 0.5437},  {"C24", 0.1893}, {"C25", -0.8186}, {"C26", 0.2640},
      {"C27", 0.2148}, {"CS", 0.08129},
      {"H1", 0.1230},  {"H2", -0.2677},  {"H3", 0.2142},  {"H4", 0.2980},  {"HS", 0.1125},
      {"N1", -1.0190}, {"N2", -0.7096},  {"N3", -1.0270}, {"N4", -0.5188}, {"N5", 0.08387},
      {"N6", 0.1836},  {"N7", -0.3187},  {"N8", -0.4458}, {"N9", 0.01508}, {"N10", -1.9500},
      {"N11", -0.3239}, {"N12", -1.1190}, {"N13", -0.3396}, {"N14", 0.2887}, {"NS", -0.4806},
      {"O1", 0.1552},  {"O2", -0.2893},  {"O3", -0.0684}, {"O4", -0.4195}, {"O5", 0.0335},
      {"O6", -0.3339}, {"O7", -1.1890},  {"O8", 0.1788},  {"O9", -0.1526}, {"O10", 0.1129},
      {"O11", 0.4833}, {"O12", -1.3260}, {"OS", -0.1188},
      {"F", 0.4202},   {"Cl", 0.6895},   {"Br", 0.8456},  {"Hal", -2.9960}, {"P", 0.8612},
      {"S1", 0.6482},  {"S2", -0.0024},  {"S3", 0.6237},
  };
  return table;
}

bool is_catch_all(const std::string& type) {
  return type == "CS" || type == "NS" || type == "OS" || type == "HS";
}

struct Typer {
  const MoleculeGraph& mol;
  const Aromaticity& ar;

  bool arom(int a) const { return ar.atoms[static_cast<std::size_t>(a)]; }
  bool arom_bond(int b) const { return ar.bonds[static_cast<std::size_t>(b)]; }

  std::string type_carbon(int a) const {
    const chem::Atom& atom = mol.atom(a);
    const int h = atom.implicit_h;
    if (!arom(a)) {
      bool has_triple = false;
      bool any_arom_nb = false;
      bool any_aliph_het = false;
      std::vector<int> doubles;
      for (const auto& nb : mol.neighbors(a)) {
        if (nb.order == 3) has_triple = true;
        if (nb.order == 2) doubles.push_back(nb.atom);
        if (arom(nb.atom)) {
          any_arom_nb = true;
        } else if (mol.atom(nb.atom).element != Element::C) {
          any_aliph_het = true;
        }
      }
      if (doubles.empty() && !has_triple) {
        if (any_aliph_het) return h >= 2 ? "C3" : "C4";
        if (any_arom_nb) {
          if (h >= 3) {
            return mol.atom(mol.neighbors(a)[0].atom).element == Element::C ? "C8" : "C9";
          }
          if (h == 2) return "C10";
          if (h == 1) return "C11";
          return "C12";
        }
        return h >= 2 ? "C1" : "C2";
      }
      if (!doubles.empty()) {
        for (int p : doubles) {
          if (!arom(p) && mol.atom(p).element != Element::C) return "C5";
        }
        for (int p : doubles) {
          if (arom(p)) return "C26";
        }
        return any_arom_nb ? "C26" : "C6";
      }
      return "C7";
    }

    // Aromatic carbon; classify by the exocyclic attachment, if any.
    for (const auto& nb : mol.neighbors(a)) {
      if (nb.order == 2 && !arom_bond(nb.bond)) {
        const Element e = mol.atom(nb.atom).element;
        if (e == Element::C || e == Element::N || e == Element::O) return "C25";
      }
    }
    for (const auto& nb : mol.neighbors(a)) {
      if (arom_bond(nb.bond)) continue;
      if (mol.atom(nb.atom).element == Element::P) return "C13";
    }
    for (const auto& nb : mol.neighbors(a)) {
      if (arom_bond(nb.bond)) continue;
      const Element e = mol.atom(nb.atom).element;
      if (e == Element::F) return "C14";
      if (e == Element::Cl) return "C15";
      if (e == Element::Br) return "C16";
    }
    if (h >= 1) return "C18";
    int arom_bonds = 0;
    for (const auto& nb : mol.neighbors(a)) {
      if (arom_bond(nb.bond)) ++arom_bonds;
    }
    if (arom_bonds >= 3) return "C19";
    for (const auto& nb : mol.neighbors(a)) {
      if (arom_bond(nb.bond) || nb.order != 1) continue;
      if (arom(nb.atom)) return "C20";
      const Element e = mol.atom(nb.atom).element;
      if (e == Element::C) return "C21";
      if (e == Element::N) return "C22";
      if (e == Element::O) return "C23";
      if (e == Element::S) return "C24";
    }
    return "CS";
  }

  std::string type_nitrogen(int a) const {
    const chem::Atom& atom = mol.atom(a);
    if (arom(a)) {
      if (atom.charge == 0) return "N11";
      if (atom.charge > 0) return "N12";
      return "NS";
    }
    bool has_triple = false;
    bool has_double = false;
    bool any_arom_nb = false;
    for (const auto& nb : mol.neighbors(a)) {
      if (nb.order == 3) has_triple = true;
      if (nb.order == 2) has_double = true;
      if (arom(nb.atom)) any_arom_nb = true;
    }
    const int h = atom.implicit_h;
    if (atom.charge > 0) {
      if (h >= 1) return "N10";
      if (has_triple) return "N14";
      return "N13";
    }
    if (atom.charge < 0) return "N14";
    if (has_triple) return "N9";
    if (has_double) return h >= 1 ? "N5" : "N6";
    const int d = mol.degree(a);
    if (h >= 2 && d == 1) return any_arom_nb ? "N3" : "N1";
    if (h == 1 && d == 2) return any_arom_nb ? "N4" : "N2";
    if (h == 0 && d == 3) return any_arom_nb ? "N8" : "N7";
    return "NS";
  }

  std::string carbonyl_oxygen(int c, int o) const {
    for (const auto& nb : mol.neighbors(c)) {
      if (nb.atom != o && nb.order == 2 && mol.atom(nb.atom).element == Element::O) return "O9";
    }
    std::vector<int> subs;
    for (const auto& nb : mol.neighbors(c)) {
      if (nb.atom != o) subs.push_back(nb.atom);
    }
    const int ch = mol.atom(c).implicit_h;
    if (ch >= 2) return "O9";
    if (ch == 1) {
      if (subs.empty()) return "OS";
      const int s = subs[0];
      if (arom(s)) return "O10";
      const Element e = mol.atom(s).element;
      if (e == Element::C || e == Element::N || e == Element::O) return "O9";
      return "OS";
    }
    if (subs.size() == 2) {
      const bool ar0 = arom(subs[0]);
      const bool ar1 = arom(subs[1]);
      const Element e0 = mol.atom(subs[0]).element;
      const Element e1 = mol.atom(subs[1]).element;
      const bool aliph_c0 = !ar0 && e0 == Element::C;
      const bool aliph_c1 = !ar1 && e1 == Element::C;
      if ((aliph_c0 && !ar1) || (aliph_c1 && !ar0)) return "O9";
      if (ar0 || ar1) return "O10";
      if (e0 != Element::C && e1 != Element::C) return "O11";
    }
    return "OS";
  }

  std::string type_oxygen(int a) const {
    const chem::Atom& atom = mol.atom(a);
    if (arom(a)) return "O1";
    const auto& nbs = mol.neighbors(a);
    if (atom.charge < 0) {
      for (const auto& nb : nbs) {
        const Element e = mol.atom(nb.atom).element;
        if (e == Element::N) return "O5";
        if (e == Element::S) return "O6";
        if (e == Element::C) {
          for (const auto& cb : mol.neighbors(nb.atom)) {
            if (cb.atom != a && cb.order == 2 && mol.atom(cb.atom).element == Element::O) {
              return "O12";
            }
          }
        }
      }
      return "O7";
    }
    if (atom.implicit_h >= 1) return "O2";
    for (const auto& nb : nbs) {
      if (nb.order != 2) continue;
      const Element pe = mol.atom(nb.atom).element;
      if (pe == Element::N || pe == Element::O) return "O5";
      if (pe == Element::S) return "O6";
      if (arom(nb.atom)) return "O8";
      if (pe == Element::C) return carbonyl_oxygen(nb.atom, a);
      return "OS";
    }
    if (mol.degree(a) == 2) {
      for (const auto& nb : nbs) {
        if (arom(nb.atom)) return "O4";
      }
      return "O3";
    }
    return "OS";
  }

  std::string type_atom(int a) const {
    const chem::Atom& atom = mol.atom(a);
    switch (atom.element) {
      case Element::C:
        return type_carbon(a);
      case Element::N:
        return type_nitrogen(a);
      case Element::O:
        return type_oxygen(a);
      case Element::S:
        return arom(a) ? "S3" : (atom.charge != 0 ? "S2" : "S1");
      case Element::P:
        return "P";
      case Element::F:
        return atom.charge == 0 ? "F" : "Hal";
      case Element::Cl:
        return atom.charge == 0 ? "Cl" : "Hal";
      case Element::Br:
        return atom.charge == 0 ? "Br" : "Hal";
    }
    throw std::logic_error("unreachable element in atom typing");
  }

  std::string type_hydrogen(int a) const {
    const Element e = mol.atom(a).element;
    if (e == Element::C) return "H1";
    if (e == Element::N) return "H3";
    if (e == Element::O) {
      if (mol.degree(a) == 0) return "HS";  // bare water
      const int x = mol.neighbors(a)[0].atom;
      const Element xe = mol.atom(x).element;
      if (xe == Element::N) return "H3";
      if (xe == Element::O || xe == Element::S) return "H4";
      if (xe == Element::C) {
        if (arom(x)) return "H2";  // phenol
        bool sp3 = true;
        for (const auto& nb : mol.neighbors(x)) {
          if (nb.order == 2) {
            const Element de = mol.atom(nb.atom).element;
            if (de == Element::C || de == Element::N || de == Element::O || de == Element::S) {
              return "H4";  // acid / enol hydroxyl
            }
          }
          if (nb.order != 1) sp3 = false;
        }
        if (sp3) return "H2";
        return "HS";
      }
      return "H2";
    }
    return "H2";  // hydrogen on S, P, ...
  }
};

}  // namespace

CrippenResult crippen_logp_detailed(const MoleculeGraph& mol) {
  const Aromaticity ar = perceive_aromaticity(mol);
  const Typer typer{mol, ar};
  const auto& table = contribution_table();

  CrippenResult result;
  result.atom_types.reserve(static_cast<std::size_t>(mol.atom_count()));
  result.h_types.reserve(static_cast<std::size_t>(mol.atom_count()));
  std::vector<double> contributions;
  for (int a = 0; a < mol.atom_count(); ++a) {
    const std::string type = typer.type_atom(a);
    contributions.push_back(table.at(type));
    if (is_catch_all(type)) ++result.fallback_count;
    const int h = mol.atom(a).implicit_h;
    std::string h_type;
    if (h > 0) {
      h_type = typer.type_hydrogen(a);
      contributions.push_back(table.at(h_type) * h);
      if (is_catch_all(h_type)) ++result.fallback_count;
    }
    result.atom_types.push_back(type);
    result.h_types.push_back(h_type);
  }
  // Sum in value order: isomorphic graphs then produce bit-identical
  // scores regardless of atom numbering.
  std::sort(contributions.begin(), contributions.end());
  for (const double c : contributions) result.logp += c;
  return result;
}

double crippen_logp(const MoleculeGraph& mol) { return crippen_logp_detailed(mol).logp; }

}  // namespace molga::descriptors
