#pragma once

// HYT1 tensor files: "HYT1" magic, dtype byte (0 = float32), rank byte, two
// reserved zero bytes, rank little-endian u32 dimensions, then little-endian
// float32 payload in row-major order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo::hyt1 {

inline constexpr char kMagic[4] = {'H', 'Y', 'T', '1'};
inline constexpr std::uint8_t kDtypeFloat32 = 0;

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  friend bool operator==(const RawTensor&, const RawTensor&) = default;
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    hyperyolo::detail::fail(ErrorKind::format, "HYT1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write(std::ostream& os, std::span<const std::uint32_t> dims,
                  std::span<const float> data) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  hyperyolo::detail::require(n == data.size(), ErrorKind::shape_mismatch,
                             "HYT1: payload length does not match dimensions");
  hyperyolo::detail::require(dims.size() <= 255, ErrorKind::invalid_argument,
                             "HYT1: rank exceeds 255");
  os.write(kMagic, 4);
  const char meta[4] = {static_cast<char>(kDtypeFloat32), static_cast<char>(dims.size()), 0, 0};
  os.write(meta, 4);
  for (auto d : dims) detail::put_u32(os, d);
  for (float f : data) detail::put_u32(os, std::bit_cast<std::uint32_t>(f));
  if (!os) hyperyolo::detail::fail(ErrorKind::io, "HYT1: write failed");
}

inline RawTensor read(std::istream& is) {
  char head[8];
  if (!is.read(head, 8)) hyperyolo::detail::fail(ErrorKind::format, "HYT1: truncated header");
  hyperyolo::detail::require(std::memcmp(head, kMagic, 4) == 0, ErrorKind::format,
                             "HYT1: bad magic");
  hyperyolo::detail::require(static_cast<std::uint8_t>(head[4]) == kDtypeFloat32,
                             ErrorKind::format, "HYT1: unsupported dtype");
  hyperyolo::detail::require(head[6] == 0 && head[7] == 0, ErrorKind::format,
                             "HYT1: reserved bytes must be zero");
  RawTensor t;
  const auto rank = static_cast<std::uint8_t>(head[5]);
  t.dims.resize(rank);
  for (auto& d : t.dims) d = detail::get_u32(is);
  const std::size_t n = t.element_count();
  t.data.resize(n);
  for (auto& f : t.data) f = std::bit_cast<float>(detail::get_u32(is));
  return t;
}

inline void save(const std::filesystem::path& path, std::span<const std::uint32_t> dims,
                 std::span<const float> data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) hyperyolo::detail::fail(ErrorKind::io, "HYT1: cannot open " + path.string());
  write(os, dims, data);
}

inline RawTensor load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) hyperyolo::detail::fail(ErrorKind::io, "HYT1: cannot open " + path.string());
  return read(is);
}

template <typename T>
void save_tensor(const std::filesystem::path& path, const TensorMap<T>& x) {
  const std::uint32_t dims[4] = {static_cast<std::uint32_t>(x.batch()),
                                 static_cast<std::uint32_t>(x.channels()),
                                 static_cast<std::uint32_t>(x.height()),
                                 static_cast<std::uint32_t>(x.width())};
  std::vector<float> data(x.data().begin(), x.data().end());
  save(path, dims, data);
}

template <typename T>
void save_matrix(const std::filesystem::path& path, const FeatureMatrix<T>& m) {
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.vertices()),
                                 static_cast<std::uint32_t>(m.channels())};
  std::vector<float> data(m.data().begin(), m.data().end());
  save(path, dims, data);
}

inline TensorMap<float> to_tensor_map(RawTensor t) {
  hyperyolo::detail::require(t.dims.size() == 4, ErrorKind::format,
                             "HYT1: expected a rank-4 tensor");
  return TensorMap<float>(t.dims[0], t.dims[1], t.dims[2], t.dims[3], std::move(t.data));
}

inline FeatureMatrix<float> to_feature_matrix(RawTensor t) {
  hyperyolo::detail::require(t.dims.size() == 2, ErrorKind::format,
                             "HYT1: expected a rank-2 tensor");
  return FeatureMatrix<float>(t.dims[0], t.dims[1], std::move(t.data));
}

}  // namespace hyperyolo::hyt1
