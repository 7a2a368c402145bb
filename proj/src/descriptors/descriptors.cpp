#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "molga/descriptors/descriptors.hpp"

namespace molga::descriptors {

using chem::MoleculeGraph;

void NormalizationParams::validate() const {
  if (!(logp.std > 0.0) || !(sa.std > 0.0) || !(ring.std > 0.0)) {
    throw std::invalid_argument("normalization standard deviations must be positive");
  }
}

void FitnessRecord::apply_discriminator(double d, double beta_weight) {
  D = d;
  beta = beta_weight;
  total = J + beta_weight * d;
}

double BuiltinDescriptors::logp(const MoleculeGraph& mol) const { return crippen_logp(mol); }

double BuiltinDescriptors::sa(const MoleculeGraph& mol) const { return sa_score(mol, table_); }

TableDescriptors TableDescriptors::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open descriptor table: " + path);
  TableDescriptors t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string key, logp_text, sa_text;
    if (!std::getline(row, key, ',') || !std::getline(row, logp_text, ',') ||
        !std::getline(row, sa_text, ',')) {
      throw std::runtime_error("bad descriptor table row at line " + std::to_string(line_no));
    }
    if (key == "canonical_key") continue;  // header
    try {
      t.values_[key] = {std::stod(logp_text), std::stod(sa_text)};
    } catch (const std::exception&) {
      throw std::runtime_error("bad descriptor values at line " + std::to_string(line_no));
    }
  }
  if (t.values_.empty()) throw std::runtime_error("descriptor table has no rows: " + path);
  return t;
}

double TableDescriptors::logp(const MoleculeGraph& mol) const {
  const std::string key = chem::canonical_key(mol);
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::out_of_range("no precomputed descriptors for key " + key);
  return it->second.first;
}

double TableDescriptors::sa(const MoleculeGraph& mol) const {
  const std::string key = chem::canonical_key(mol);
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::out_of_range("no precomputed descriptors for key " + key);
  return it->second.second;
}

FitnessRecord penalized_logp(const MoleculeGraph& mol, const DescriptorProvider& provider,
                             const NormalizationParams& params) {
  params.validate();
  FitnessRecord r;
  r.raw_logp = provider.logp(mol);
  r.raw_sa = provider.sa(mol);
  r.raw_ring = ring_penalty(mol);
  r.logp_norm = (r.raw_logp - params.logp.mean) / params.logp.std;
  r.sa_norm = (r.raw_sa - params.sa.mean) / params.sa.std;
  r.ring_norm = (r.raw_ring - params.ring.mean) / params.ring.std;
  r.J = r.logp_norm - r.sa_norm - r.ring_norm;
  r.total = r.J;
  return r;
}

NormalizationParams compute_normalization(const std::vector<MoleculeGraph>& mols,
                                          const DescriptorProvider& provider) {
  if (mols.empty()) throw std::invalid_argument("cannot normalize against an empty dataset");
  std::vector<double> logp_values, sa_values, ring_values;
  logp_values.reserve(mols.size());
  sa_values.reserve(mols.size());
  ring_values.reserve(mols.size());
  for (const auto& mol : mols) {
    logp_values.push_back(provider.logp(mol));
    sa_values.push_back(provider.sa(mol));
    ring_values.push_back(ring_penalty(mol));
  }
  const auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());  // population variance
    return ComponentStats{mean, std::sqrt(var)};
  };
  NormalizationParams params;
  params.logp = stats(logp_values);
  params.sa = stats(sa_values);
  params.ring = stats(ring_values);
  if (!(params.logp.std > 0.0) || !(params.sa.std > 0.0) || !(params.ring.std > 0.0)) {
    throw std::invalid_argument("dataset has a zero-variance fitness component");
  }
  return params;
}

}  // namespace molga::descriptors
