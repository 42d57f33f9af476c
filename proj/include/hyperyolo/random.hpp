#pragma once

#include <array>
#include <cstddef>

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

template <typename T>
TensorMap<T> random_tensor(Rng& rng, std::size_t b, std::size_t c, std::size_t h, std::size_t w,
                           double lo = -1.0, double hi = 1.0) {
  TensorMap<T> t(b, c, h, w);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
FeatureMatrix<T> random_features(Rng& rng, std::size_t n, std::size_t c, double lo = -1.0,
                                 double hi = 1.0) {
  FeatureMatrix<T> m(n, c);
  for (auto& v : m.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return m;
}

template <typename T>
Matrix<T> random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                        double hi = 1.0) {
  Matrix<T> m(r, c);
  for (auto& v : m.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return m;
}

// Random pyramid for an image of size h x w (both divisible by 32).
template <typename T>
FeaturePyramid<T> random_pyramid(Rng& rng, const std::array<std::size_t, 5>& widths,
                                 std::size_t batch, std::size_t h, std::size_t w) {
  FeaturePyramid<T> pyr;
  for (std::size_t i = 0; i < 5; ++i) {
    const std::size_t s = FeaturePyramid<T>::stride(i);
    pyr[i] = random_tensor<T>(rng, batch, widths[i], h / s, w / s);
  }
  return pyr;
}

}  // namespace hyperyolo
