#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rnntlid/kernel/param.hpp"

namespace rnntlid {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// File envelope shared by model checkpoints and language-signal files:
//
//   RNNTLID <kind> <format version>
//   config_hash <16 hex digits>
//   config <n lines>
//   ...n lines of key = value text...
//   tensors <m>
//   <name> <rows> <cols>      (m lines, blob order)
//   end
//   <little-endian float32 blobs, row-major, in manifest order>
struct Envelope {
  static constexpr int kFormatVersion = 1;

  std::string kind;
  std::string config_text;
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(const std::string& name) const;
};

void save_envelope(const std::filesystem::path& path, const Envelope& envelope);
Envelope load_envelope(const std::filesystem::path& path);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string content_hash(std::string_view text);

// Collects the current values of a parameter list.
std::vector<NamedTensor> snapshot(const ParameterList& params);
// Assigns values by name; every parameter must be present with a matching shape.
void restore(const ParameterList& params, const std::vector<NamedTensor>& tensors);

}  // namespace rnntlid
