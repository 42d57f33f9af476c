#pragma once

#include <algorithm>
#include <array>
#include <cstddef>

#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

// Reference kernel: full double loop, one scalar accumulator per pair.
template <typename T>
Matrix<T> pairwise_sq_distances_naive(const FeatureMatrix<T>& x) {
  const std::size_t n = x.vertices();
  const std::size_t c = x.channels();
  Matrix<T> d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t k = 0; k < c; ++k) {
        const T diff = x(i, k) - x(j, k);
        acc += diff * diff;
      }
      d(i, j) = acc;
    }
  return d;
}

namespace detail {

inline constexpr std::size_t kDistanceLanes = 8;
inline constexpr std::size_t kDistanceTile = 64;

// Squared distance with eight interleaved partial sums, reduced in a fixed
// tree order. Identical rows give exactly zero.
template <typename T>
T sq_distance_lanes(const T* a, const T* b, std::size_t c) {
  std::array<T, kDistanceLanes> acc{};
  std::size_t k = 0;
  for (; k + kDistanceLanes <= c; k += kDistanceLanes)
    for (std::size_t l = 0; l < kDistanceLanes; ++l) {
      const T diff = a[k + l] - b[k + l];
      acc[l] += diff * diff;
    }
  for (std::size_t l = 0; k < c; ++k, ++l) {
    const T diff = a[k] - b[k];
    acc[l] += diff * diff;
  }
  return ((acc[0] + acc[4]) + (acc[2] + acc[6])) + ((acc[1] + acc[5]) + (acc[3] + acc[7]));
}

}  // namespace detail

// Cache-blocked pairwise squared L2 distances. Only the upper triangle is
// computed, tile by tile, and mirrored, so the result is exactly symmetric with
// an exactly zero diagonal.
template <typename T>
Matrix<T> pairwise_sq_distances(const FeatureMatrix<T>& x) {
  constexpr std::size_t TB = detail::kDistanceTile;
  const std::size_t n = x.vertices();
  const std::size_t c = x.channels();
  Matrix<T> d(n, n);
  const T* base = x.data().data();
  for (std::size_t i0 = 0; i0 < n; i0 += TB) {
    const std::size_t i1 = std::min(n, i0 + TB);
    for (std::size_t j0 = i0; j0 < n; j0 += TB) {
      const std::size_t j1 = std::min(n, j0 + TB);
      for (std::size_t i = i0; i < i1; ++i) {
        const T* ri = base + i * c;
        for (std::size_t j = std::max(j0, i + 1); j < j1; ++j) {
          const T v = detail::sq_distance_lanes(ri, base + j * c, c);
          d(i, j) = v;
          d(j, i) = v;
        }
      }
    }
  }
  return d;
}

}  // namespace hyperyolo
