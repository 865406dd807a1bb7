#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sessrec/parameter.hpp"

namespace sessrec {

// Single-file parameter archive. Layout (all integers and doubles little
// endian): magic, config hash, rng seed, param count, then per parameter
// name length + bytes, rank, dims, raw values. Round trips bit-exactly.
namespace checkpoint_detail {

constexpr char kMagic[8] = {'S', 'R', 'C', 'K', 'P', 'T', '0', '1'};

inline void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<uint64_t>(d)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace checkpoint_detail

struct CheckpointHeader {
  uint64_t config_hash = 0;
  uint64_t seed = 0;
};

inline void save_checkpoint(const std::string& path, ParamStore& store,
                            const CheckpointHeader& header) {
  namespace d = checkpoint_detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path);
  os.write(d::kMagic, 8);
  d::put_u64(os, header.config_hash);
  d::put_u64(os, header.seed);
  auto params = store.all();
  d::put_u64(os, params.size());
  for (Parameter* p : params) {
    d::put_u64(os, p->name.size());
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    d::put_u64(os, p->value.rank());
    for (int64_t dim : p->value.shape()) d::put_u64(os, static_cast<uint64_t>(dim));
    for (int64_t i = 0; i < p->value.numel(); ++i) d::put_f64(os, p->value[i]);
  }
  if (!os) throw DataError("short write while saving checkpoint: " + path);
}

// Loads values into an already-built store; parameter names and shapes must
// match exactly. Returns the header for seed/config verification.
inline CheckpointHeader load_checkpoint(const std::string& path, ParamStore& store) {
  namespace d = checkpoint_detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, d::kMagic, 8) != 0)
    throw DataError("bad checkpoint magic in " + path);
  CheckpointHeader header;
  header.config_hash = d::get_u64(is);
  header.seed = d::get_u64(is);
  const uint64_t count = d::get_u64(is);
  if (count != store.size())
    throw DataError("checkpoint has " + std::to_string(count) + " parameters, model expects " +
                    std::to_string(store.size()));
  for (uint64_t k = 0; k < count; ++k) {
    const uint64_t name_len = d::get_u64(is);
    std::string name(name_len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(name_len));
    Parameter* p = store.find(name);
    if (!p) throw DataError("checkpoint parameter '" + name + "' unknown to this model");
    const uint64_t rank = d::get_u64(is);
    std::vector<int64_t> shape(rank);
    for (auto& dim : shape) dim = static_cast<int64_t>(d::get_u64(is));
    if (shape != p->value.shape())
      throw DataError("checkpoint shape " + shape_str(shape) + " for '" + name +
                      "' does not match model shape " + shape_str(p->value.shape()));
    for (int64_t i = 0; i < p->value.numel(); ++i) p->value[i] = d::get_f64(is);
  }
  if (!is) throw DataError("truncated checkpoint: " + path);
  return header;
}

}  // namespace sessrec
