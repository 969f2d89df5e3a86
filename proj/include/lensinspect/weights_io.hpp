// Copyright 2026 The lensinspect Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Binary weight file (all integers and floats little-endian):
//
//   "LNSW"                       4-byte magic
//   u32 version                  currently 1
//   u32 num_classes
//   u32 reg_max
//   u32 entry_count
//   entry_count x {
//     u16 name_length, name bytes (ASCII layer path, e.g. "model.2.m.0.cv1")
//     u8  flags                  bit 0: bias present, bit 1: batchnorm present
//     u32 out, in, kh, kw        weight shape
//     f32 weight[out*in*kh*kw]   row-major (out, in, kh, kw)
//     f32 bias[out]              if bit 0
//     f32 eps, f32 gamma[out], beta[out], mean[out], var[out]   if bit 1
//   }
//   u32 crc32                    CRC-32 (IEEE) of every preceding byte
//
// Entries are written in ascending name order.

#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lensinspect/error.hpp"
#include "lensinspect/netgraph.hpp"

namespace lensinspect {

inline constexpr char kWeightMagic[4] = {'L', 'N', 'S', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;

class WeightFileError : public ModelError {
 public:
  enum class Code { io, bad_magic, version_mismatch, checksum, malformed };

  WeightFileError(Code code, const std::string& what) : ModelError(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

namespace detail {

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(std::span<const float> v) {
    for (float x : v) f32(x);
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}
  std::size_t remaining() const { return n_ - pos_; }
  void need(std::size_t k) const {
    if (remaining() < k) throw WeightFileError(WeightFileError::Code::malformed, "weights: unexpected end of payload");
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<float> f32s(std::size_t count) {
    need(count * 4);
    std::vector<float> v(count);
    for (auto& x : v) x = f32();
    return v;
  }
  std::string str(std::size_t len) {
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }

 private:
  const std::uint8_t* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  detail::ByteWriter out;
  out.bytes(kWeightMagic, 4);
  out.u32(kWeightVersion);
  out.u32(store.header.num_classes);
  out.u32(store.header.reg_max);
  out.u32(static_cast<std::uint32_t>(store.entries.size()));
  for (const auto& [name, unit] : store.entries) {
    if (name.size() > 0xFFFF) throw ArgumentError("weights: entry name too long: " + name.substr(0, 64));
    out.u16(static_cast<std::uint16_t>(name.size()));
    out.bytes(name.data(), name.size());
    out.u8(static_cast<std::uint8_t>((unit.bias.empty() ? 0 : 1) | (unit.bn ? 2 : 0)));
    const Shape s = unit.weight.shape();
    for (auto d : {s.n, s.c, s.h, s.w}) out.u32(static_cast<std::uint32_t>(d));
    out.f32s(unit.weight.data());
    if (!unit.bias.empty()) out.f32s(unit.bias);
    if (unit.bn) {
      out.f32(unit.bn->eps);
      out.f32s(unit.bn->gamma);
      out.f32s(unit.bn->beta);
      out.f32s(unit.bn->mean);
      out.f32s(unit.bn->var);
    }
  }
  const std::uint32_t crc = detail::crc32_of(out.buffer().data(), out.buffer().size());
  out.u32(crc);
  return std::move(out.buffer());
}

inline WeightStore deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  using Code = WeightFileError::Code;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0) {
    throw WeightFileError(Code::bad_magic, "weights: bad magic (not a lensinspect weight file)");
  }
  if (bytes.size() < 8) throw WeightFileError(Code::checksum, "weights: checksum failure (file truncated)");
  detail::ByteReader head(bytes.data() + 4, 4);
  const std::uint32_t version = head.u32();
  if (version != kWeightVersion) {
    throw WeightFileError(Code::version_mismatch, "weights: version " + std::to_string(version) +
                                                      " unsupported (expected " +
                                                      std::to_string(kWeightVersion) + ")");
  }
  if (bytes.size() < 24) throw WeightFileError(Code::checksum, "weights: checksum failure (file truncated)");
  const std::size_t payload = bytes.size() - 4;
  detail::ByteReader trailer(bytes.data() + payload, 4);
  const std::uint32_t stored = trailer.u32();
  const std::uint32_t actual = detail::crc32_of(bytes.data(), payload);
  if (stored != actual) {
    throw WeightFileError(Code::checksum, "weights: checksum failure (stored " + std::to_string(stored) +
                                              ", computed " + std::to_string(actual) + ")");
  }

  detail::ByteReader in(bytes.data() + 8, payload - 8);
  WeightStore store;
  store.header.version = version;
  store.header.num_classes = in.u32();
  store.header.reg_max = in.u32();
  store.header.checksum = stored;
  const std::uint32_t count = in.u32();
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::string name = in.str(in.u16());
    const std::uint8_t flags = in.u8();
    Shape s;
    s.n = in.u32();
    s.c = in.u32();
    s.h = in.u32();
    s.w = in.u32();
    if (s.numel() > in.remaining() / 4) throw WeightFileError(Code::malformed, "weights: entry " + name + " overruns file");
    ConvUnit unit;
    unit.weight = Tensor(s, in.f32s(s.numel()));
    if (flags & 1) unit.bias = in.f32s(s.n);
    if (flags & 2) {
      BatchNormParams bn;
      bn.eps = in.f32();
      bn.gamma = in.f32s(s.n);
      bn.beta = in.f32s(s.n);
      bn.mean = in.f32s(s.n);
      bn.var = in.f32s(s.n);
      unit.bn = std::move(bn);
    }
    if (!store.entries.emplace(name, std::move(unit)).second) {
      throw WeightFileError(Code::malformed, "weights: duplicate entry " + name);
    }
  }
  if (in.remaining() != 0) throw WeightFileError(Code::malformed, "weights: trailing bytes after last entry");
  return store;
}

inline void save_weights(WeightStore& store, const std::string& path) {
  const auto bytes = serialize_weights(store);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw WeightFileError(WeightFileError::Code::io, "weights: cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw WeightFileError(WeightFileError::Code::io, "weights: write failed for " + path);
  store.header.version = kWeightVersion;
  detail::ByteReader trailer(bytes.data() + bytes.size() - 4, 4);
  store.header.checksum = trailer.u32();
}

inline WeightStore load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WeightFileError(WeightFileError::Code::io, "weights: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

/// Loads weights and checks them against a graph (shape mismatch, missing
/// or orphan entries are reported naming the layer).
inline WeightStore load_weights(const std::string& path, const Graph& graph) {
  WeightStore store = load_weights(path);
  validate_weights(graph, store);
  return store;
}

/// Graph matching a store's header; fused when the store carries no BN.
inline Graph graph_for(const WeightStore& store) {
  Graph g = build_graph(store.header.num_classes, store.header.reg_max);
  bool any_bn = false;
  for (const auto& [name, unit] : store.entries) any_bn = any_bn || unit.bn.has_value();
  g.fused = !any_bn && !store.entries.empty();
  return g;
}

}  // namespace lensinspect
