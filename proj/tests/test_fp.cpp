#include <algorithm>
#include <set>
#include <vector>

#include <doctest.h>
#include "molga/chem/molecule.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/util/rng.hpp"

using molga::chem::Element;
using molga::chem::MoleculeGraph;
using molga::fp::Fingerprint;
using molga::fp::fraction_unique;
using molga::fp::internal_diversity;
using molga::fp::morgan_fp;
using molga::fp::tanimoto;

namespace {

MoleculeGraph chain(int n) {
  std::vector<MoleculeGraph::AtomSpec> atoms(static_cast<std::size_t>(n), {Element::C, 0});
  std::vector<molga::chem::Bond> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1, 1});
  return MoleculeGraph(atoms, bonds);
}

MoleculeGraph permuted(const MoleculeGraph& mol, const std::vector<int>& perm) {
  std::vector<MoleculeGraph::AtomSpec> atoms(static_cast<std::size_t>(mol.atom_count()));
  for (int i = 0; i < mol.atom_count(); ++i) {
    atoms[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = {mol.atom(i).element,
                                                                          mol.atom(i).charge};
  }
  std::vector<molga::chem::Bond> bonds;
  for (const auto& b : mol.bonds()) {
    bonds.push_back({perm[static_cast<std::size_t>(b.a)], perm[static_cast<std::size_t>(b.b)],
                     b.order});
  }
  return MoleculeGraph(atoms, bonds);
}

Fingerprint from_set(const std::vector<int>& on, int width = 2048) {
  Fingerprint f = Fingerprint::empty(width, 2);
  for (int b : on) f.set(b);
  return f;
}

MoleculeGraph random_decoded(molga::util::Rng& rng, const molga::selfies::Alphabet& alphabet) {
  int length = 1 + static_cast<int>(molga::util::uniform_index(rng, 12));
  auto s = molga::selfies::random_selfies(rng, length, alphabet);
  return molga::selfies::decode(s, alphabet);
}

}  // namespace

TEST_CASE("fingerprint bit container bookkeeping") {
  Fingerprint f = Fingerprint::empty(2048, 2);
  CHECK(f.popcount() == 0);
  f.set(0);
  f.set(63);
  f.set(64);
  f.set(2047);
  CHECK(f.popcount() == 4);
  CHECK(f.test(63));
  CHECK(f.test(64));
  CHECK_FALSE(f.test(65));
  CHECK(f.on_bits() == std::vector<int>{0, 63, 64, 2047});
  CHECK_THROWS_AS(Fingerprint::empty(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(Fingerprint::empty(2048, -1), std::invalid_argument);
}

TEST_CASE("methane yields exactly one bit at radius 2") {
  Fingerprint f = morgan_fp(MoleculeGraph::methane(), 2, 2048);
  CHECK(f.popcount() == 1);
  // A lone atom has no larger neighborhood at any radius, so deeper radii
  // add nothing.
  CHECK(morgan_fp(MoleculeGraph::methane(), 5, 2048).on_bits() == f.on_bits());
}

TEST_CASE("isomorphic graphs give identical fingerprints") {
  MoleculeGraph butane = chain(4);
  MoleculeGraph relabeled = permuted(butane, {2, 0, 3, 1});
  CHECK(morgan_fp(butane) == morgan_fp(relabeled));
  CHECK(tanimoto(morgan_fp(butane), morgan_fp(relabeled)) == 1.0);

  molga::util::Rng rng(91);
  const auto alphabet = molga::selfies::Alphabet::builtin_default();
  for (int trial = 0; trial < 200; ++trial) {
    MoleculeGraph mol = random_decoded(rng, alphabet);
    std::vector<int> perm(static_cast<std::size_t>(mol.atom_count()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    molga::util::shuffle(rng, perm);
    CHECK(morgan_fp(mol) == morgan_fp(permuted(mol, perm)));
  }
}

TEST_CASE("constitutional isomers differ") {
  MoleculeGraph butane = chain(4);
  MoleculeGraph isobutane({{Element::C, 0}, {Element::C, 0}, {Element::C, 0}, {Element::C, 0}},
                          {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}});
  CHECK_FALSE(morgan_fp(butane) == morgan_fp(isobutane));
  CHECK(tanimoto(morgan_fp(butane), morgan_fp(isobutane)) < 1.0);
}

TEST_CASE("tanimoto on explicit bit sets") {
  Fingerprint a = from_set({1, 2, 3});
  Fingerprint b = from_set({2, 3, 4});
  CHECK(tanimoto(a, b) == doctest::Approx(0.5));
  CHECK(tanimoto(a, a) == 1.0);
  CHECK(tanimoto(from_set({}), from_set({})) == 1.0);
  CHECK(tanimoto(from_set({7}), from_set({9})) == 0.0);
  CHECK_THROWS_AS(tanimoto(a, Fingerprint::empty(1024, 2)), std::invalid_argument);
  Fingerprint r3 = Fingerprint::empty(2048, 3);
  CHECK_THROWS_AS(tanimoto(a, r3), std::invalid_argument);
}

TEST_CASE("internal diversity reference values") {
  std::vector<Fingerprint> same{from_set({1, 5}), from_set({1, 5}), from_set({1, 5})};
  CHECK(internal_diversity(same) == doctest::Approx(0.0));
  CHECK(internal_diversity(same, false) == doctest::Approx(0.0));

  // Two molecules with no shared bits: the ordered-pair mean with the
  // diagonal counts two distance-1 pairs out of four.
  std::vector<Fingerprint> disjoint{from_set({1}), from_set({2})};
  CHECK(internal_diversity(disjoint) == doctest::Approx(0.5));
  CHECK(internal_diversity(disjoint, false) == doctest::Approx(1.0));

  CHECK(internal_diversity(std::vector<Fingerprint>{from_set({3})}) == doctest::Approx(0.0));
  CHECK(internal_diversity(std::vector<Fingerprint>{from_set({3})}, false) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(internal_diversity(std::vector<Fingerprint>{}), std::invalid_argument);
}

TEST_CASE("internal diversity matches a brute-force oracle on random populations") {
  molga::util::Rng rng(417);
  const auto alphabet = molga::selfies::Alphabet::builtin_default();
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(molga::util::uniform_index(rng, 10));
    std::vector<Fingerprint> fps;
    for (int i = 0; i < n; ++i) fps.push_back(morgan_fp(random_decoded(rng, alphabet)));

    double sum_with = 0.0;
    double sum_without = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double d = 1.0 - tanimoto(fps[static_cast<std::size_t>(i)],
                                  fps[static_cast<std::size_t>(j)]);
        sum_with += d;
        if (i != j) sum_without += d;
      }
    }
    CHECK(internal_diversity(fps) == doctest::Approx(sum_with / (n * n)));
    CHECK(internal_diversity(fps, false) == doctest::Approx(sum_without / (n * (n - 1))));
  }
}

TEST_CASE("tanimoto distance satisfies the triangle inequality on samples") {
  molga::util::Rng rng(2024);
  const auto alphabet = molga::selfies::Alphabet::builtin_default();
  for (int trial = 0; trial < 300; ++trial) {
    Fingerprint a = morgan_fp(random_decoded(rng, alphabet));
    Fingerprint b = morgan_fp(random_decoded(rng, alphabet));
    Fingerprint c = morgan_fp(random_decoded(rng, alphabet));
    double dab = 1.0 - tanimoto(a, b);
    double dbc = 1.0 - tanimoto(b, c);
    double dac = 1.0 - tanimoto(a, c);
    CHECK(dac <= dab + dbc + 1e-12);
  }
}

TEST_CASE("diversity over molecule lists uses canonical structure, not labels") {
  MoleculeGraph butane = chain(4);
  MoleculeGraph relabeled = permuted(butane, {3, 1, 0, 2});
  std::vector<MoleculeGraph> mols{butane, relabeled};
  CHECK(internal_diversity(mols) == doctest::Approx(0.0));
  CHECK(fraction_unique(mols) == doctest::Approx(0.5));
}

TEST_CASE("fraction unique reference values") {
  std::vector<std::string> all_same(500, "k1");
  CHECK(fraction_unique(all_same) == doctest::Approx(1.0 / 500.0));

  std::vector<std::string> distinct{"a", "b", "c", "d"};
  CHECK(fraction_unique(distinct) == doctest::Approx(1.0));

  std::vector<std::string> mixed{"a", "a", "b", "b", "a"};
  CHECK(fraction_unique(mixed) == doctest::Approx(0.4));

  CHECK_THROWS_AS(fraction_unique(std::vector<std::string>{}), std::invalid_argument);
}
