// Builds the synthetic-accessibility fragment table and the precomputed
// descriptor fixture from a SMILES corpus.
//
// Every corpus molecule is round-tripped through the SMILES writer and the
// genome encoder first; any failure aborts, because downstream fixtures
// assume a fully expressible corpus. The fragment table's rescale endpoints
// are calibrated so the corpus SA scores hit the reference normalization
// constants (mean 3.05, std 0.831).
//
// Usage: build_fixture_tables IN.smi TABLE_OUT.txt DESCRIPTORS_OUT.csv FULL_OUT.csv

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "molga/chem/molecule.hpp"
#include "molga/descriptors/descriptors.hpp"
#include "molga/fp/fingerprint.hpp"
#include "molga/selfies/selfies.hpp"
#include "molga/smiles/smiles.hpp"

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace

int main(int argc, char** argv) {
  using namespace molga;
  if (argc != 5) {
    std::fprintf(stderr, "usage: %s IN.smi TABLE_OUT.txt DESCRIPTORS_OUT.csv FULL_OUT.csv\n",
                 argv[0]);
    return 2;
  }

  const auto dataset = smiles::load_dataset(argv[1]);
  if (!dataset.skip_log.empty()) {
    for (const auto& skip : dataset.skip_log) {
      std::fprintf(stderr, "unparseable line %d: %s (%s)\n", skip.line, skip.text.c_str(),
                   skip.reason.c_str());
    }
    return 1;
  }
  std::printf("loaded %zu molecules from %s\n", dataset.entries.size(), argv[1]);

  const auto alphabet = selfies::Alphabet::builtin_default();
  std::map<std::uint64_t, std::int64_t> counts;
  int max_tokens = 0;
  for (const auto& entry : dataset.entries) {
    const std::string key = chem::canonical_key(entry.mol);
    const auto reparsed = smiles::parse_smiles(smiles::write_smiles(entry.mol));
    if (chem::canonical_key(reparsed) != key) {
      std::fprintf(stderr, "SMILES round trip failed: %s\n", entry.smiles.c_str());
      return 1;
    }
    const auto genome = selfies::encode(entry.mol, alphabet);
    max_tokens = std::max(max_tokens, genome.length());
    const auto decoded = selfies::decode(genome, alphabet);
    if (chem::canonical_key(decoded) != key) {
      std::fprintf(stderr, "genome round trip failed: %s\n", entry.smiles.c_str());
      return 1;
    }
    for (const std::uint64_t id : fp::morgan_atom_ids(entry.mol, 2)) counts[id] += 1;
  }
  std::printf("fragment table: %zu distinct environments, longest genome %d tokens\n",
              counts.size(), max_tokens);

  // Recover raw scores through a clamp-free provisional rescale, then solve
  // the affine endpoints so the corpus lands on mean 3.05 / std 0.831.
  const double wide_lo = -1000.0, wide_hi = 1000.0;
  const auto provisional = descriptors::FragmentTable::from_counts(counts, wide_lo, wide_hi);
  std::vector<double> raws;
  raws.reserve(dataset.entries.size());
  for (const auto& entry : dataset.entries) {
    const double scaled = descriptors::sa_score(entry.mol, provisional);
    raws.push_back(wide_lo - 1.0 + (11.0 - scaled) * (wide_hi - wide_lo) / 9.0);
  }
  const Moments raw_m = moments(raws);
  if (raw_m.std <= 0.0) {
    std::fprintf(stderr, "degenerate corpus: raw SA spread is zero\n");
    return 1;
  }
  const double span = 9.0 * raw_m.std / 0.831;
  const double lo = raw_m.mean + 1.0 - (11.0 - 3.05) / 9.0 * span;
  const auto table = descriptors::FragmentTable::from_counts(counts, lo, lo + span);
  table.save(argv[2]);
  std::printf("rescale endpoints: lo=%.6f hi=%.6f (raw mean %.6f std %.6f)\n", lo, lo + span,
              raw_m.mean, raw_m.std);

  const descriptors::BuiltinDescriptors provider{table};
  const descriptors::NormalizationParams params;
  std::FILE* desc = std::fopen(argv[3], "w");
  std::FILE* full = std::fopen(argv[4], "w");
  if (!desc || !full) {
    std::fprintf(stderr, "cannot open output files\n");
    return 1;
  }
  std::fprintf(full, "smiles,canonical_key,logp,sa,ring,J\n");
  std::vector<double> logps, sas, rings, js;
  int clamped = 0;
  for (const auto& entry : dataset.entries) {
    const auto record = descriptors::penalized_logp(entry.mol, provider, params);
    logps.push_back(record.raw_logp);
    sas.push_back(record.raw_sa);
    rings.push_back(record.raw_ring);
    js.push_back(record.J);
    if (record.raw_sa <= 1.0 || record.raw_sa >= 10.0) ++clamped;
    std::fprintf(desc, "%s,%.17g,%.17g\n", chem::canonical_key(entry.mol).c_str(),
                 record.raw_logp, record.raw_sa);
    std::fprintf(full, "%s,%s,%.17g,%.17g,%.17g,%.17g\n", entry.smiles.c_str(),
                 chem::canonical_key(entry.mol).c_str(), record.raw_logp, record.raw_sa,
                 record.raw_ring, record.J);
  }
  std::fclose(desc);
  std::fclose(full);

  const Moments lm = moments(logps), sm = moments(sas), rm = moments(rings), jm = moments(js);
  std::printf("logP mean %.4f std %.4f\n", lm.mean, lm.std);
  std::printf("SA   mean %.4f std %.4f (%d clamped)\n", sm.mean, sm.std, clamped);
  std::printf("ring mean %.4f std %.4f\n", rm.mean, rm.std);
  std::printf("J    mean %.4f std %.4f\n", jm.mean, jm.std);
  return 0;
}
