#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/descriptors/descriptors.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/smiles/smiles.hpp"
#include "molga/util/rng.hpp"

using molga::chem::Element;
using molga::chem::MoleculeGraph;
using namespace molga::descriptors;

namespace {

MoleculeGraph mol(const std::string& smiles) { return molga::smiles::parse_smiles(smiles); }

MoleculeGraph carbon_chain(int n) {
  std::vector<MoleculeGraph::AtomSpec> atoms(static_cast<std::size_t>(n), {Element::C, 0});
  std::vector<molga::chem::Bond> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1, 1});
  return MoleculeGraph(atoms, bonds);
}

MoleculeGraph element_chain(Element e, int n) {
  std::vector<MoleculeGraph::AtomSpec> atoms(static_cast<std::size_t>(n), {e, 0});
  std::vector<molga::chem::Bond> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1, 1});
  return MoleculeGraph(atoms, bonds);
}

// Minimal table whose rescale interval matches the conventional one, so
// expected scores can be derived by hand.
FragmentTable toy_table(const std::map<std::uint64_t, std::int64_t>& counts) {
  return FragmentTable::from_counts(counts, -4.0, 2.5);
}

bool has_type(const CrippenResult& r, const std::string& type) {
  for (const auto& t : r.atom_types) {
    if (t == type) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("aromatic perception on reference rings") {
  auto flags = [](const std::string& s) { return perceive_aromaticity(mol(s)); };

  const Aromaticity benzene = flags("c1ccccc1");
  for (bool b : benzene.atoms) CHECK(b);
  for (bool b : benzene.bonds) CHECK(b);

  for (bool b : flags("C1CCCCC1").atoms) CHECK_FALSE(b);
  for (bool b : flags("C1=CCCCC1").atoms) CHECK_FALSE(b);  // cyclohexene
  for (bool b : flags("C1=CC=C1").atoms) CHECK_FALSE(b);   // cyclobutadiene, 4 pi
  for (bool b : flags("C1=CC=CC=CC=C1").atoms) CHECK_FALSE(b);  // 8-ring skipped
  for (bool b : flags("C1=CC=CC1").atoms) CHECK_FALSE(b);  // cyclopentadiene CH2

  for (const char* s : {"c1ccncc1", "c1ccoc1", "c1ccsc1", "c1cc[nH]c1"}) {
    const Aromaticity a = flags(s);
    for (bool b : a.atoms) CHECK(b);
  }

  // Both kekulizations of naphthalene must perceive all ten atoms.
  for (const char* s : {"c1ccc2ccccc2c1", "C1=CC2=CC=CC=C2C=C1"}) {
    const Aromaticity a = flags(s);
    int count = 0;
    for (bool b : a.atoms) count += b ? 1 : 0;
    CHECK(count == 10);
  }

  // Styrene: ring aromatic, vinyl arm not.
  const MoleculeGraph styrene = mol("C=Cc1ccccc1");
  const Aromaticity a = perceive_aromaticity(styrene);
  int aromatic_atoms = 0;
  for (bool b : a.atoms) aromatic_atoms += b ? 1 : 0;
  CHECK(aromatic_atoms == 6);

  // 2-pyridone: the exocyclic carbonyl does not break the ring current.
  const Aromaticity pyridone = flags("O=c1cccc[nH]1");
  int pyridone_count = 0;
  for (bool b : pyridone.atoms) pyridone_count += b ? 1 : 0;
  CHECK(pyridone_count == 6);
}

TEST_CASE("logP reference values hand-derived from the contribution table") {
  const auto close = [](double got, double expected) {
    return std::abs(got - expected) < 1e-9;
  };
  CHECK(close(crippen_logp(MoleculeGraph::methane()), 0.6361));
  CHECK(close(crippen_logp(mol("CC")), 1.0262));
  CHECK(close(crippen_logp(mol("c1ccccc1")), 1.6866));
  CHECK(close(crippen_logp(mol("CCO")), -0.0014));
  CHECK(close(crippen_logp(mol("Oc1ccccc1")), 1.3922));
  CHECK(close(crippen_logp(mol("c1ccncc1")), 1.0816));
  CHECK(close(crippen_logp(mol("CC(=O)O")), 0.0909));
  CHECK(close(crippen_logp(mol("Nc1ccccc1")), 1.2688));
  CHECK(close(crippen_logp(mol("Cc1ccccc1")), 1.99502));
  CHECK(close(crippen_logp(mol("c1ccc2ccccc2c1")), 2.8398));
  CHECK(close(crippen_logp(mol("c1ccoc1")), 1.2796));
  CHECK(close(crippen_logp(mol("c1cc[nH]c1")), 1.0147));
  CHECK(close(crippen_logp(mol("[O-][N+](=O)c1ccccc1")), 1.5948));

  // Sulfur saturates to valence 6 here, so the ring sulfur of s1cccc1
  // carries four implicit hydrogens: 4*(C18+H1) + S3 + 4*H2.
  CHECK(close(crippen_logp(mol("c1ccsc1")),
              4 * (0.1581 + 0.1230) + 0.6237 + 4 * -0.2677));
}

TEST_CASE("atom typing picks the intended environment classes") {
  const auto types = [](const std::string& s) { return crippen_logp_detailed(mol(s)); };

  const CrippenResult propane = types("CCC");
  for (const auto& t : propane.atom_types) CHECK(t == "C1");

  CHECK(has_type(types("CC(C)C"), "C2"));        // isobutane branch point
  CHECK(has_type(types("CO"), "C3"));            // methanol carbon
  CHECK(has_type(types("CC(=O)C"), "C5"));       // ketone carbonyl carbon
  CHECK(has_type(types("C=C"), "C6"));           // ethene
  CHECK(has_type(types("C#C"), "C7"));           // ethyne
  CHECK(has_type(types("Cc1ccccc1"), "C8"));     // toluene methyl
  CHECK(has_type(types("Cn1cccc1"), "C9"));      // N-methylpyrrole methyl
  CHECK(has_type(types("Clc1ccccc1"), "C15"));   // chlorobenzene ipso carbon
  CHECK(has_type(types("c1ccc2ccccc2c1"), "C19"));  // naphthalene fusion
  CHECK(has_type(types("c1ccc(cc1)-c1ccccc1"), "C20"));  // biphenyl link
  CHECK(has_type(types("C=Cc1ccccc1"), "C26"));  // styrene alpha carbon
  CHECK(has_type(types("O=c1cccc[nH]1"), "C25"));  // exocyclic carbonyl on ring

  const CrippenResult urea = types("NC(=O)N");
  CHECK(has_type(urea, "O11"));
  CHECK(has_type(urea, "N1"));
  CHECK(has_type(types("NC(=O)c1ccccc1"), "O10"));  // benzamide carbonyl oxygen
  CHECK(has_type(types("CC(=O)N"), "O9"));          // acetamide carbonyl oxygen
  CHECK(has_type(types("O=c1cccc[nH]1"), "O8"));    // pyridone oxygen
  CHECK(has_type(types("COC"), "O3"));
  CHECK(has_type(types("COc1ccccc1"), "O4"));
  CHECK(has_type(types("CC(=O)[O-]"), "O12"));      // acetate
  CHECK(has_type(types("C[N+](C)(C)C"), "N13"));    // tetramethylammonium
  CHECK(has_type(types("CC#N"), "N9"));
  CHECK(has_type(types("CNC"), "N2"));
  CHECK(has_type(types("CSC"), "S1"));
  CHECK(has_type(types("CP(C)C"), "P"));

  // Ammonia only matches the nitrogen catch-all; that is reported.
  const CrippenResult ammonia = types("N");
  CHECK(ammonia.atom_types[0] == "NS");
  CHECK(ammonia.fallback_count >= 1);
}

TEST_CASE("fragment table arithmetic and persistence") {
  const std::map<std::uint64_t, std::int64_t> counts{{7ull, 9}, {11ull, 1}};
  const FragmentTable t = toy_table(counts);
  CHECK(t.size() == 2);
  CHECK(t.score(7) == doctest::Approx(std::log10(0.9)));
  CHECK(t.score(11) == doctest::Approx(-1.0));
  CHECK(t.floor_score() == doctest::Approx(-2.0));
  CHECK(t.score(99) == doctest::Approx(-2.0));  // unseen fragment hits floor

  const std::string path = "toy_fragment_table.txt";
  t.save(path);
  const FragmentTable loaded = FragmentTable::load(path);
  CHECK(loaded.size() == t.size());
  CHECK(loaded.score(7) == t.score(7));
  CHECK(loaded.score(99) == t.floor_score());
  CHECK(loaded.rescale_lo() == t.rescale_lo());
  CHECK(loaded.rescale_hi() == t.rescale_hi());
  std::remove(path.c_str());

  CHECK_THROWS_AS(FragmentTable::load("no_such_fragment_table.txt"), std::runtime_error);
  CHECK_THROWS_AS(FragmentTable::from_counts({}, -4.0, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(FragmentTable::from_counts(counts, 2.5, 2.5), std::invalid_argument);
}

TEST_CASE("sa score of a single seen atom is the rescaled zero point") {
  const MoleculeGraph methane = MoleculeGraph::methane();
  const auto ids = molga::fp::morgan_atom_ids(methane, 2);
  REQUIRE(ids.size() == 1);
  const FragmentTable t = toy_table({{ids[0], 1}});
  // fragment term log10(1/1) = 0, no penalties: raw 0 maps to
  // 11 - (0 + 4 + 1) * 9 / 6.5.
  CHECK(sa_score(methane, t) == doctest::Approx(11.0 - 5.0 * 9.0 / 6.5));
}

TEST_CASE("sa score penalties shift the scale by the documented amounts") {
  const FragmentTable t = toy_table({{1ull, 1}});  // everything scores at the floor

  // Bridged vs plain ring system of equal size: two bridgeheads cost
  // log10(3) raw, i.e. log10(3) * 9 / 6.5 after rescaling.
  const double norbornane = sa_score(mol("C1CC2CCC1C2"), t);
  const double methylcyclohexane = sa_score(mol("CC1CCCCC1"), t);
  CHECK(norbornane - methylcyclohexane ==
        doctest::Approx(std::log10(3.0) * 9.0 / 6.5).epsilon(1e-9));

  // Spiro vs fused bicyclononane: one spiro atom costs log10(2) raw.
  const double spiro = sa_score(mol("C1CCC2(C1)CCCC2"), t);
  const double fused = sa_score(mol("C1CCC2CCCC2C1"), t);
  CHECK(spiro - fused == doctest::Approx(std::log10(2.0) * 9.0 / 6.5).epsilon(1e-9));

  // Macrocycle penalty: a 9-ring pays log10(2) more than an 8-ring beyond
  // the size-penalty difference.
  const double ring9 = sa_score(mol("C1CCCCCCCC1"), t);
  const double ring8 = sa_score(mol("C1CCCCCCC1"), t);
  const double size8 = std::pow(8.0, 1.005) - 8.0;
  const double size9 = std::pow(9.0, 1.005) - 9.0;
  CHECK(ring9 - ring8 ==
        doctest::Approx((std::log10(2.0) + size9 - size8) * 9.0 / 6.5).epsilon(1e-9));
}

TEST_CASE("sa score stays in range and grows with size") {
  const FragmentTable t = toy_table({{1ull, 1}});
  const double ethane = sa_score(mol("CC"), t);
  CHECK(ethane >= 1.0);
  CHECK(ethane <= 10.0);
  CHECK(sa_score(carbon_chain(60), t) >= ethane);
  CHECK(sa_score(element_chain(Element::S, 60), t) >= ethane);

  molga::util::Rng rng(5150);
  const auto alphabet = molga::selfies::Alphabet::builtin_default();
  for (int trial = 0; trial < 200; ++trial) {
    int length = 1 + static_cast<int>(molga::util::uniform_index(rng, 40));
    const MoleculeGraph m =
        molga::selfies::decode(molga::selfies::random_selfies(rng, length, alphabet), alphabet);
    const double sa = sa_score(m, t);
    CHECK(sa >= 1.0);
    CHECK(sa <= 10.0);
  }
  CHECK_THROWS_AS(sa_score(MoleculeGraph({}, {}), t), std::invalid_argument);
}

TEST_CASE("ring penalty is the excess of the largest ring over six") {
  CHECK(ring_penalty(mol("c1ccccc1")) == 0.0);
  CHECK(ring_penalty(mol("C1CCCCCCC1")) == 2.0);
  CHECK(ring_penalty(mol("CCCCCC")) == 0.0);
  CHECK(ring_penalty(mol("C1CCCCCCCCC1")) == 4.0);
  CHECK(ring_penalty(MoleculeGraph::methane()) == 0.0);
}

TEST_CASE("normalization params validate standard deviations") {
  NormalizationParams p;
  CHECK(p.logp.mean == doctest::Approx(2.47));
  CHECK(p.sa.std == doctest::Approx(0.831));
  CHECK(p.ring.mean == doctest::Approx(0.038));
  p.validate();
  p.sa.std = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("penalized logP combines z-scores with signs (+1, -1, -1)") {
  // A descriptor table pins raw values exactly at the means.
  const MoleculeGraph pentane = mol("CCCCC");
  const std::string key = molga::chem::canonical_key(pentane);
  const std::string path = "toy_descriptor_table.csv";
  {
    std::ofstream out(path);
    out << "canonical_key,logp,sa\n";
    out << key << ",5.0,3.0\n";
  }
  const TableDescriptors table = TableDescriptors::load(path);
  std::remove(path.c_str());

  NormalizationParams params;
  params.logp = {5.0, 2.0};
  params.sa = {3.0, 1.0};
  params.ring = {0.0, 1.0};

  const FitnessRecord at_means = penalized_logp(pentane, table, params);
  CHECK(at_means.J == doctest::Approx(0.0));
  CHECK(at_means.total == doctest::Approx(0.0));
  CHECK_FALSE(at_means.D.has_value());

  params.logp = {3.0, 2.0};  // raw 5.0 is now mean + 1 sigma
  const FitnessRecord shifted = penalized_logp(pentane, table, params);
  CHECK(shifted.J == doctest::Approx(1.0));
  CHECK(shifted.J ==
        doctest::Approx(shifted.logp_norm - shifted.sa_norm - shifted.ring_norm));

  FitnessRecord with_d = shifted;
  with_d.apply_discriminator(0.25, -100.0);
  CHECK(with_d.total == doctest::Approx(shifted.J - 25.0));
  CHECK(with_d.D.has_value());

  // Unknown molecule in the table provider is an error.
  CHECK_THROWS_AS(table.logp(MoleculeGraph::methane()), std::out_of_range);
}

TEST_CASE("penalized logP is a pure function of the graph") {
  const FragmentTable t = toy_table({{1ull, 1}});
  const BuiltinDescriptors provider(t);
  const NormalizationParams params;

  const MoleculeGraph a = mol("CC(C)Cc1ccccc1O");
  const MoleculeGraph b = mol("OC1=CC=CC=C1CC(C)C");  // same molecule, other notation
  REQUIRE(molga::chem::canonical_key(a) == molga::chem::canonical_key(b));
  const FitnessRecord ra = penalized_logp(a, provider, params);
  const FitnessRecord rb = penalized_logp(b, provider, params);
  CHECK(ra.raw_logp == rb.raw_logp);
  CHECK(ra.raw_sa == rb.raw_sa);
  CHECK(ra.raw_ring == rb.raw_ring);
  CHECK(ra.J == rb.J);
}

TEST_CASE("normalization recomputation reproduces dataset moments") {
  const std::vector<MoleculeGraph> mols{mol("CC"), mol("CCC"), mol("C1CCCCCCC1")};
  const std::string path = "toy_norm_table.csv";
  {
    std::ofstream out(path);
    out << molga::chem::canonical_key(mols[0]) << ",1.0,2.0\n";
    out << molga::chem::canonical_key(mols[1]) << ",2.0,4.0\n";
    out << molga::chem::canonical_key(mols[2]) << ",3.0,6.0\n";
  }
  const TableDescriptors table = TableDescriptors::load(path);
  std::remove(path.c_str());

  const NormalizationParams p = compute_normalization(mols, table);
  CHECK(p.logp.mean == doctest::Approx(2.0));
  CHECK(p.logp.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(p.sa.mean == doctest::Approx(4.0));
  CHECK(p.sa.std == doctest::Approx(std::sqrt(8.0 / 3.0)));
  // ring penalties: 0, 0, 2
  CHECK(p.ring.mean == doctest::Approx(2.0 / 3.0));
  CHECK(p.ring.std == doctest::Approx(std::sqrt(8.0 / 9.0)));

  CHECK_THROWS_AS(compute_normalization({}, table), std::invalid_argument);
  // zero variance: single molecule
  CHECK_THROWS_AS(compute_normalization({mols[0]}, table), std::invalid_argument);
}
