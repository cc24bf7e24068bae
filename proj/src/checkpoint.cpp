#include "contrasum/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "contrasum/errors.hpp"

namespace contrasum {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw ParseError(path + ": truncated checkpoint");
  }
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) {
    throw ParseError(path + ": truncated checkpoint");
  }
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is, const std::string& path) {
  const uint64_t bits = get_u64(is, path);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedTensors& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kCheckpointMagic, 8);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(t.shape().size()));
    for (size_t d : t.shape()) put_u64(os, d);
    for (double v : t.value()) put_f64(os, v);
  }
  os.flush();
  if (!os) throw IoError("write failed for " + path);
}

NamedTensors load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw ParseError(path + ": not a checkpoint file");
  }
  const uint32_t version = get_u32(is, path);
  if (version != kCheckpointVersion) {
    throw ParseError(path + ": unsupported checkpoint version " +
                     std::to_string(version));
  }
  const uint32_t count = get_u32(is, path);
  NamedTensors entries;
  entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = get_u32(is, path);
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) {
      throw ParseError(path + ": truncated checkpoint");
    }
    const uint32_t rank = get_u32(is, path);
    if (rank == 0 || rank > 2) {
      throw ParseError(path + ": tensor '" + name + "' has rank " +
                       std::to_string(rank));
    }
    std::vector<size_t> shape(rank);
    size_t elems = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<size_t>(get_u64(is, path));
      elems *= shape[d];
    }
    std::vector<double> values(elems);
    for (size_t j = 0; j < elems; ++j) values[j] = get_f64(is, path);
    entries.emplace_back(name, Tensor::from(shape, std::move(values)));
  }
  return entries;
}

void copy_checkpoint_values(const NamedTensors& entries,
                            const NamedTensors& targets) {
  std::unordered_map<std::string, Tensor> index;
  for (const auto& [name, t] : targets) index.emplace(name, t);
  std::unordered_set<std::string> seen;
  for (const auto& [name, src] : entries) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw ValidationError("checkpoint has unknown parameter '" + name + "'");
    }
    if (!seen.insert(name).second) {
      throw ValidationError("checkpoint repeats parameter '" + name + "'");
    }
    if (it->second.shape() != src.shape()) {
      throw ValidationError("parameter '" + name + "' has shape " +
                            shape_str(src.shape()) + ", expected " +
                            shape_str(it->second.shape()));
    }
    it->second.value() = src.value();
  }
  if (seen.size() != index.size()) {
    for (const auto& [name, t] : index) {
      if (!seen.count(name)) {
        throw ValidationError("checkpoint is missing parameter '" + name +
                              "'");
      }
    }
  }
}

}  // namespace contrasum
