#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "hyperyolo/error.hpp"

namespace hyperyolo {

// Element-wise relative difference |a - b| / max(1, |b|): relative for
// magnitudes above one, absolute below, so values near zero do not blow up.
inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// Largest rel_diff over paired elements; NaN anywhere yields +inf.
template <typename A, typename B>
double max_rel_diff(std::span<const A> a, std::span<const B> b) {
  detail::require(a.size() == b.size(), ErrorKind::shape_mismatch,
                  "max_rel_diff: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = rel_diff(static_cast<double>(a[i]), static_cast<double>(b[i]));
    if (std::isnan(d)) return INFINITY;
    worst = std::max(worst, d);
  }
  return worst;
}

template <typename X, typename Y>
double max_rel_diff(const X& a, const Y& b) {
  using A = typename X::value_type;
  using B = typename Y::value_type;
  return max_rel_diff<A, B>(std::span<const A>(a.data()), std::span<const B>(b.data()));
}

}  // namespace hyperyolo
