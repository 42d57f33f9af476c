#pragma once

// Straight-line reference implementations used by the verification suite and
// the unit tests. They share no code with the production kernels.

#include <cmath>
#include <cstddef>
#include <vector>

#include "hyperyolo/conv.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo::reference {

// Direct convolution: loops over image, output channel, output row, output
// column, input channel, kernel row, kernel column. Taps falling in the zero
// padding are skipped.
template <typename T>
TensorMap<T> conv2d(const TensorMap<T>& x, const ConvBlockParams<T>& p) {
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(p.kernel);
  const std::ptrdiff_t pad = (k - 1) / 2;
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(p.stride);
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(x.height());
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(x.width());
  const std::size_t oh = (x.height() + p.stride - 1) / p.stride;
  const std::size_t ow = (x.width() + p.stride - 1) / p.stride;
  const std::size_t icg = p.in_channels / p.groups;
  const std::size_t ocg = p.out_channels / p.groups;
  TensorMap<T> out(x.batch(), p.out_channels, oh, ow);
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t oc = 0; oc < p.out_channels; ++oc) {
      const std::size_t g = oc / ocg;
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          T acc = T(0);
          for (std::size_t ic = 0; ic < icg; ++ic)
            for (std::ptrdiff_t ky = 0; ky < k; ++ky)
              for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * s + ky - pad;
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox) * s + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                const T wv = p.weights[((oc * icg + ic) * p.kernel + static_cast<std::size_t>(ky)) *
                                           p.kernel +
                                       static_cast<std::size_t>(kx)];
                acc += wv * x.at(b, g * icg + ic, static_cast<std::size_t>(iy),
                                 static_cast<std::size_t>(ix));
              }
          acc += p.bias[oc];
          if (p.activation == Activation::silu) acc = acc / (T(1) + std::exp(-acc));
          out.at(b, oc, oy, ox) = acc;
        }
    }
  return out;
}

// Dense 0/1 adjacency of the eps-ball graph (strict inequality; A = I at eps = 0),
// evaluated with plain double-precision distances.
template <typename T>
std::vector<std::vector<double>> epsilon_adjacency(const FeatureMatrix<T>& x, double eps) {
  const std::size_t n = x.vertices();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const double d = static_cast<double>(x(i, c)) - static_cast<double>(x(j, c));
        s += d * d;
      }
      a[i][j] = (i == j || std::sqrt(s) < eps) ? 1.0 : 0.0;
    }
  return a;
}

// X + (D^-1/2 A D^-1/2) X Theta with dense matrices in double precision.
template <typename T>
FeatureMatrix<double> graphconv_dense(const FeatureMatrix<T>& x,
                                      const std::vector<std::vector<double>>& a,
                                      const Matrix<T>& theta) {
  const std::size_t n = x.vertices();
  const std::size_t c = x.channels();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  std::vector<double> xt(n * c, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t i = 0; i < c; ++i)
        xt[v * c + j] += static_cast<double>(x(v, i)) * static_cast<double>(theta(i, j));
  FeatureMatrix<double> out(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t u = 0; u < n; ++u)
        s += a[i][u] / std::sqrt(deg[i] * deg[u]) * xt[u * c + j];
      out(i, j) = static_cast<double>(x(i, j)) + s;
    }
  return out;
}

}  // namespace hyperyolo::reference
