#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

enum class Activation { none, silu };

// Convolution + bias + activation. Batch normalization is assumed folded into
// weights and bias. Padding is always (k-1)/2.
template <typename T>
struct ConvBlockParams {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t groups = 1;
  std::vector<T> weights;  // out x (in/groups) x k x k
  std::vector<T> bias;     // out
  Activation activation = Activation::silu;

  std::size_t fan_in() const { return (in_channels / groups) * kernel * kernel; }
  std::size_t padding() const { return (kernel - 1) / 2; }

  void validate() const {
    using detail::require;
    require(in_channels >= 1 && out_channels >= 1, ErrorKind::invalid_argument,
            "conv: channel counts must be >= 1");
    require(kernel % 2 == 1, ErrorKind::invalid_argument,
            "conv: kernel size must be odd, got " + std::to_string(kernel));
    require(stride >= 1, ErrorKind::invalid_argument, "conv: stride must be >= 1");
    require(groups >= 1 && in_channels % groups == 0 && out_channels % groups == 0,
            ErrorKind::invalid_argument,
            "conv: groups (" + std::to_string(groups) + ") must divide in and out channels");
    require(weights.size() == out_channels * fan_in(), ErrorKind::shape_mismatch,
            "conv: weight count does not match out x (in/groups) x k x k");
    require(bias.size() == out_channels, ErrorKind::shape_mismatch,
            "conv: bias count does not match out channels");
  }

  friend bool operator==(const ConvBlockParams&, const ConvBlockParams&) = default;
};

template <typename T>
T silu(T v) {
  return v / (T(1) + std::exp(-v));
}

template <typename T>
ConvBlockParams<T> zero_conv(std::size_t in, std::size_t out, std::size_t kernel,
                             std::size_t stride = 1, std::size_t groups = 1,
                             Activation act = Activation::silu) {
  ConvBlockParams<T> p;
  p.in_channels = in;
  p.out_channels = out;
  p.kernel = kernel;
  p.stride = stride;
  p.groups = groups;
  p.activation = act;
  p.weights.assign(out * (in / groups) * kernel * kernel, T(0));
  p.bias.assign(out, T(0));
  return p;
}

// He-style uniform init: weights in +-sqrt(6 / fan_in), biases in +-0.1.
template <typename T>
ConvBlockParams<T> random_conv(Rng& rng, std::size_t in, std::size_t out, std::size_t kernel,
                               std::size_t stride = 1, std::size_t groups = 1,
                               Activation act = Activation::silu) {
  auto p = zero_conv<T>(in, out, kernel, stride, groups, act);
  const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in()));
  for (auto& w : p.weights) w = static_cast<T>(rng.uniform(-bound, bound));
  for (auto& b : p.bias) b = static_cast<T>(rng.uniform(-0.1, 0.1));
  return p;
}

// 1x1 conv whose weight matrix is the identity (in == out).
template <typename T>
ConvBlockParams<T> identity_conv(std::size_t channels, Activation act = Activation::none) {
  auto p = zero_conv<T>(channels, channels, 1, 1, 1, act);
  for (std::size_t c = 0; c < channels; ++c) p.weights[c * channels + c] = T(1);
  return p;
}

namespace detail {

// C (m x n) = A (m x k) * B (k x n), all row-major, C overwritten. Four output
// rows share each streamed B row; columns are chunked so the C rows stay in L1.
// Every element is accumulated over k in ascending order.
template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k) {
  constexpr std::size_t NC = 512;
  for (std::size_t j0 = 0; j0 < n; j0 += NC) {
    const std::size_t nb = std::min(NC, n - j0);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      T* c0 = c + i * n + j0;
      T* c1 = c0 + n;
      T* c2 = c1 + n;
      T* c3 = c2 + n;
      std::fill(c0, c0 + nb, T(0));
      std::fill(c1, c1 + nb, T(0));
      std::fill(c2, c2 + nb, T(0));
      std::fill(c3, c3 + nb, T(0));
      const T* a0 = a + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T w0 = a0[kk], w1 = a0[k + kk], w2 = a0[2 * k + kk], w3 = a0[3 * k + kk];
        const T* br = b + kk * n + j0;
        for (std::size_t j = 0; j < nb; ++j) {
          const T bv = br[j];
          c0[j] += w0 * bv;
          c1[j] += w1 * bv;
          c2[j] += w2 * bv;
          c3[j] += w3 * bv;
        }
      }
    }
    for (; i < m; ++i) {
      T* cr = c + i * n + j0;
      std::fill(cr, cr + nb, T(0));
      for (std::size_t kk = 0; kk < k; ++kk) {
        const T w = a[i * k + kk];
        const T* br = b + kk * n + j0;
        for (std::size_t j = 0; j < nb; ++j) cr[j] += w * br[j];
      }
    }
  }
}

}  // namespace detail

template <typename T>
TensorMap<T> conv2d_block(const TensorMap<T>& x, const ConvBlockParams<T>& p) {
  p.validate();
  detail::require(x.channels() == p.in_channels, ErrorKind::shape_mismatch,
                  "conv: input has " + std::to_string(x.channels()) + " channels, expected " +
                      std::to_string(p.in_channels));
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t k = p.kernel;
  const std::size_t s = p.stride;
  const std::size_t pad = p.padding();
  const std::size_t oh = (h - 1) / s + 1;
  const std::size_t ow = (w - 1) / s + 1;
  const std::size_t n = oh * ow;
  const std::size_t icg = p.in_channels / p.groups;
  const std::size_t ocg = p.out_channels / p.groups;
  const std::size_t kdim = icg * k * k;
  const bool direct = (k == 1 && s == 1);

  TensorMap<T> out(x.batch(), p.out_channels, oh, ow);
  std::vector<T> col(direct ? 0 : kdim * n);

  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t g = 0; g < p.groups; ++g) {
      const T* bmat = nullptr;
      if (direct) {
        bmat = x.data().data() + x.index(b, g * icg, 0, 0);
      } else {
        for (std::size_t ic = 0; ic < icg; ++ic) {
          auto src = x.channel(b, g * icg + ic);
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              T* row = col.data() + ((ic * k + ky) * k + kx) * n;
              for (std::size_t oy = 0; oy < oh; ++oy) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s + ky) -
                                          static_cast<std::ptrdiff_t>(pad);
                T* dst = row + oy * ow;
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                  std::fill(dst, dst + ow, T(0));
                  continue;
                }
                const T* srow = src.data() + static_cast<std::size_t>(iy) * w;
                for (std::size_t ox = 0; ox < ow; ++ox) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s + kx) -
                                            static_cast<std::ptrdiff_t>(pad);
                  dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w))
                                ? T(0)
                                : srow[static_cast<std::size_t>(ix)];
                }
              }
            }
        }
        bmat = col.data();
      }
      T* cmat = out.data().data() + out.index(b, g * ocg, 0, 0);
      detail::gemm(p.weights.data() + g * ocg * kdim, bmat, cmat, ocg, n, kdim);
    }
  }

  for (std::size_t b = 0; b < out.batch(); ++b)
    for (std::size_t oc = 0; oc < p.out_channels; ++oc) {
      const T bias = p.bias[oc];
      for (auto& v : out.channel(b, oc)) {
        v += bias;
        if (p.activation == Activation::silu) v = silu(v);
      }
    }
  return out;
}

template <typename T>
TensorMap<T> dsconv_block(const TensorMap<T>& x, const ConvBlockParams<T>& depthwise,
                          const ConvBlockParams<T>& pointwise) {
  detail::require(depthwise.groups == depthwise.in_channels, ErrorKind::invalid_argument,
                  "dsconv: depthwise stage must have groups == in_channels");
  detail::require(pointwise.kernel == 1, ErrorKind::invalid_argument,
                  "dsconv: pointwise stage must be 1x1");
  return conv2d_block(conv2d_block(x, depthwise), pointwise);
}

}  // namespace hyperyolo
