#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "molga/chem/molecule.hpp"

namespace molga::smiles {

// Parse failure; the message carries the byte offset and reason.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, const std::string& reason)
      : std::runtime_error("offset " + std::to_string(offset) + ": " + reason), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

// Supported subset: atoms C,N,O,F,S,P,Cl,Br; bonds -,=,#; branches; ring
// closures 1-9 and %nn; lowercase aromatic ring atoms (kekulized on input);
// bracket atoms restricted to element + hydrogen count + charge. Everything
// else fails loudly.
chem::MoleculeGraph parse_smiles(std::string_view text);

// Canonical writer: isomorphic graphs give byte-identical strings, and
// parse_smiles(write_smiles(m)) is isomorphic to m. Output is kekulized
// (no aromatic lowercase).
std::string write_smiles(const chem::MoleculeGraph& mol);

struct DatasetEntry {
  chem::MoleculeGraph mol;
  std::string smiles;  // original input text
};

struct SkipRecord {
  int line = 0;
  std::string text;
  std::string reason;
};

struct Dataset {
  std::vector<DatasetEntry> entries;
  std::string source_path;
  std::vector<SkipRecord> skip_log;
};

// One record per line, optional whitespace-separated id ignored, blank lines
// and '#' comments skipped. Unparseable lines land in the skip log; more
// than 10% unparseable raises (wrong file). Missing file raises.
Dataset load_dataset(const std::string& path);

}  // namespace molga::smiles
