#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rda/model.h"

namespace rda {

// Flat named-tensor file, little-endian:
//
//   "RDAT"  u32 version (=1)  u32 tensor_count
//   per tensor:
//     u32 name_length, name bytes (UTF-8, no terminator)
//     u32 rank, u64 dims[rank]
//     f64 values[prod(dims)], row-major
struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

void write_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
// Throws ParseError (line = byte offset of the failure) on malformed files.
std::vector<NamedTensor> read_tensors(const std::filesystem::path& path);

// Tensors "class_weights", "smeasure_head" and, for the hidden-layer model,
// "hidden_weights".
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace rda
