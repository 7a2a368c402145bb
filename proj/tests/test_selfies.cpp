#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/util/rng.hpp"

using molga::chem::Element;
using molga::chem::MoleculeGraph;
using molga::selfies::Alphabet;
using molga::selfies::SelfiesString;

namespace {

const Alphabet& abc() {
  static Alphabet a = Alphabet::builtin_default();
  return a;
}

MoleculeGraph dec(const std::string& text) {
  return molga::selfies::decode(SelfiesString::parse(text, abc()), abc());
}

std::string key(const MoleculeGraph& m) { return molga::chem::canonical_key(m); }

}  // namespace

TEST_CASE("default alphabet layout") {
  CHECK(abc().size() == 21);
  CHECK(abc().max_length() == 81);
  CHECK(abc().index_of("[C]") == 0);
  CHECK(abc().index_of("[Ring2]") == 20);
  CHECK(abc().index_of("[B]") == std::nullopt);
  // Digit overloading: index mod 16.
  CHECK(abc().symbol(4).digit_value == 4);
  CHECK(abc().symbol(16).digit_value == 0);
  CHECK(abc().symbol(20).digit_value == 4);
}

TEST_CASE("string construction enforces membership and length") {
  CHECK_THROWS_AS(SelfiesString::parse("[C][B]", abc()), std::invalid_argument);
  CHECK_THROWS_AS(SelfiesString::parse("[C", abc()), std::invalid_argument);
  CHECK_THROWS_AS(SelfiesString::from_indices({0, 99}, abc()), std::invalid_argument);
  CHECK_THROWS_AS(SelfiesString::from_indices(std::vector<int>(82, 0), abc()),
                  std::invalid_argument);
  SelfiesString s = SelfiesString::parse("[C][=O]", abc());
  CHECK(s.length() == 2);
  CHECK(s.text(abc()) == "[C][=O]");
}

TEST_CASE("decode reference strings") {
  MoleculeGraph methane = dec("");
  CHECK(methane.atom_count() == 1);
  CHECK(methane.atom(0).element == Element::C);

  MoleculeGraph ethane = dec("[C][C]");
  CHECK(ethane.atom_count() == 2);
  CHECK(ethane.bond_order_between(0, 1) == 1);

  MoleculeGraph formaldehyde = dec("[C][=O]");
  CHECK(formaldehyde.atom_count() == 2);
  CHECK(formaldehyde.bond_order_between(0, 1) == 2);
  CHECK(formaldehyde.atom(1).element == Element::O);

  // Third symbol unreachable: both fluorine valences spent on the F-F bond.
  MoleculeGraph difluorine = dec("[F][F][F]");
  CHECK(difluorine.atom_count() == 2);
  CHECK(difluorine.bond_order_between(0, 1) == 1);

  // Requested order is clipped by the new atom's maximum valence.
  MoleculeGraph co = dec("[C][#N]");
  CHECK(co.bond_order_between(0, 1) == 3);
  MoleculeGraph cf = dec("[C][=C][F]");
  CHECK(cf.bond_order_between(1, 2) == 1);
}

TEST_CASE("decode branches") {
  // [Branch1_1] + digit [C](0) -> Q=0, one content symbol.
  MoleculeGraph propane = dec("[C][Branch1_1][C][C][C]");
  CHECK(propane.atom_count() == 3);
  CHECK(key(propane) == key(dec("[C][C][C]")));

  // Double-bonded branch content: C(=O)O backbone (formic acid).
  MoleculeGraph formic = dec("[C][Branch1_2][C][=O][O]");
  REQUIRE(formic.atom_count() == 3);
  CHECK(formic.bond_order_between(0, 1) == 2);
  CHECK(formic.bond_order_between(0, 2) == 1);
  CHECK(formic.atom(0).implicit_h == 1);

  // Branch marker cap limits the first bond: Branch1_1 forces a single bond
  // even though the content requests a double.
  MoleculeGraph capped = dec("[C][Branch1_1][C][=O][O]");
  CHECK(capped.bond_order_between(0, 1) == 1);

  // Branch off an exhausted atom is skipped but its content is consumed.
  MoleculeGraph skipped = dec("[F][F][Branch1_1][C][C][C]");
  CHECK(skipped.atom_count() == 2);
}

TEST_CASE("decode rings") {
  // Kekulized benzene: digit symbol index 4 ([=O]) gives Q=4, target atom 0.
  MoleculeGraph benzene = dec("[C][=C][C][=C][C][=C][Ring1][=O]");
  REQUIRE(benzene.atom_count() == 6);
  CHECK(benzene.bond_count() == 6);
  CHECK(molga::chem::max_ring_size(benzene) == 6);
  int doubles = 0;
  for (const auto& b : benzene.bonds()) doubles += b.order == 2 ? 1 : 0;
  CHECK(doubles == 3);

  // Triangle via Q=1 (digit symbol [=C] at index 1).
  MoleculeGraph triangle = dec("[C][C][C][Ring1][=C]");
  CHECK(molga::chem::max_ring_size(triangle) == 3);

  // Existing bond: ring symbol targeting the previous atom is skipped.
  MoleculeGraph no_dup = dec("[C][C][Ring1][C]");
  CHECK(no_dup.bond_count() == 1);

  // Out-of-range targets clamp to atom 0.
  MoleculeGraph clamped = dec("[C][C][C][Ring1][=O]");
  CHECK(molga::chem::max_ring_size(clamped) == 3);

  // Ring before any atom and trailing digits are inert.
  CHECK(dec("[Ring1][C]").atom_count() == 1);
  CHECK(dec("[C][C][Ring1]").bond_count() == 1);
}

TEST_CASE("decode robustness fuzz") {
  molga::util::Rng rng(424242u);
  for (int it = 0; it < 10000; ++it) {
    int length = 1 + static_cast<int>(molga::util::uniform_index(rng, 81));
    SelfiesString s = molga::selfies::random_selfies(rng, length, abc());
    MoleculeGraph mol = molga::selfies::decode(s, abc());
    REQUIRE(mol.atom_count() >= 1);
    auto verdict = molga::chem::validate(mol);
    REQUIRE_MESSAGE(verdict.ok(), "string " << s.text(abc()));
    REQUIRE(mol.connected());
  }
}

TEST_CASE("prefix decoding never has more atoms") {
  molga::util::Rng rng(7u);
  for (int it = 0; it < 300; ++it) {
    SelfiesString s = molga::selfies::random_selfies(rng, 40, abc());
    int full = molga::selfies::decode(s, abc()).atom_count();
    std::size_t cut = molga::util::uniform_index(rng, 40);
    std::vector<int> prefix(s.indices().begin(), s.indices().begin() + static_cast<long>(cut));
    SelfiesString p = SelfiesString::from_indices(prefix, abc());
    CHECK(molga::selfies::decode(p, abc()).atom_count() <= full);
  }
}

TEST_CASE("decode is deterministic") {
  molga::util::Rng rng(99u);
  SelfiesString s = molga::selfies::random_selfies(rng, 81, abc());
  CHECK(key(molga::selfies::decode(s, abc())) == key(molga::selfies::decode(s, abc())));

  molga::util::Rng r1(42u), r2(42u);
  CHECK(molga::selfies::random_selfies(r1, 81, abc()) ==
        molga::selfies::random_selfies(r2, 81, abc()));
}

TEST_CASE("encode reference molecules") {
  CHECK(molga::selfies::encode(MoleculeGraph::methane(), abc()).text(abc()) == "[C]");

  // Benzene: 6 atom symbols plus one ring marker and digit.
  MoleculeGraph benzene = dec("[C][=C][C][=C][C][=C][Ring1][=O]");
  SelfiesString enc = molga::selfies::encode(benzene, abc());
  int ring_symbols = 0;
  for (int idx : enc.indices()) {
    if (abc().symbol(idx).kind == molga::selfies::SymbolKind::Ring) ++ring_symbols;
  }
  CHECK(ring_symbols == 1);
  CHECK(key(molga::selfies::decode(enc, abc())) == key(benzene));
}

TEST_CASE("encode rejects inexpressible molecules") {
  MoleculeGraph charged({{Element::O, -1}}, {});
  CHECK_THROWS_AS(molga::selfies::encode(charged, abc()), std::runtime_error);
  MoleculeGraph split({{Element::C, 0}, {Element::C, 0}}, {});
  CHECK_THROWS_AS(molga::selfies::encode(split, abc()), std::runtime_error);
}

TEST_CASE("round trip over random decoded molecules") {
  molga::util::Rng rng(20260815u);
  for (int it = 0; it < 2000; ++it) {
    int length = 1 + static_cast<int>(molga::util::uniform_index(rng, 81));
    SelfiesString s = molga::selfies::random_selfies(rng, length, abc());
    MoleculeGraph mol = molga::selfies::decode(s, abc());
    SelfiesString enc = molga::selfies::encode(mol, abc());
    MoleculeGraph back = molga::selfies::decode(enc, abc());
    REQUIRE_MESSAGE(key(back) == key(mol), "string " << s.text(abc()));
  }
}

TEST_CASE("alphabet file round trip") {
  Alphabet from_file = Alphabet::load(std::string(MOLGA_SOURCE_DIR) + "/data/alphabet_default.json");
  REQUIRE(from_file.size() == abc().size());
  for (int i = 0; i < abc().size(); ++i) {
    CHECK(from_file.symbol(i).token == abc().symbol(i).token);
    CHECK(from_file.symbol(i).kind == abc().symbol(i).kind);
    CHECK(from_file.symbol(i).order == abc().symbol(i).order);
    CHECK(from_file.symbol(i).digits == abc().symbol(i).digits);
    CHECK(from_file.symbol(i).digit_value == abc().symbol(i).digit_value);
  }
  molga::util::Rng rng(3u);
  for (int it = 0; it < 100; ++it) {
    SelfiesString s = molga::selfies::random_selfies(rng, 50, abc());
    CHECK(key(molga::selfies::decode(s, from_file)) == key(molga::selfies::decode(s, abc())));
  }
}
