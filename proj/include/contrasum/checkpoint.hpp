#pragma once

#include <string>
#include <utility>
#include <vector>

#include "contrasum/tensor.hpp"

namespace contrasum {

// Versioned binary container of named float64 tensors. Entries are written
// in list order with fixed-width little-endian fields, so identical inputs
// produce byte-identical files.
//
// Layout: magic "CSUMCKPT" | u32 version | u32 entry count, then per entry:
// u32 name length | name bytes | u32 rank | u64 dims | f64 row-major payload.
inline constexpr char kCheckpointMagic[8] = {'C', 'S', 'U', 'M',
                                             'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_checkpoint(const std::string& path, const NamedTensors& entries);

// Loaded tensors do not require grad; callers copy values into live
// parameters by name.
NamedTensors load_checkpoint(const std::string& path);

// Copies entry values into same-named targets. Requires an exact match:
// unknown, duplicate or missing names and shape mismatches raise
// ValidationError.
void copy_checkpoint_values(const NamedTensors& entries,
                            const NamedTensors& targets);

}  // namespace contrasum
