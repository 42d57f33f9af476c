#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "hyperyolo/conv.hpp"
#include "hyperyolo/error.hpp"
#include "hyperyolo/presets.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/tensor.hpp"
#include "hyperyolo/tensor_ops.hpp"

namespace hyperyolo {

// B1..B5 at strides 2, 4, 8, 16, 32.
template <typename T>
struct FeaturePyramid {
  std::array<TensorMap<T>, 5> levels;

  const TensorMap<T>& operator[](std::size_t i) const { return levels[i]; }
  TensorMap<T>& operator[](std::size_t i) { return levels[i]; }

  static constexpr std::size_t stride(std::size_t level) { return std::size_t{2} << level; }

  // Input image height implied by B1.
  std::size_t image_height() const { return levels[0].height() * 2; }
  std::size_t image_width() const { return levels[0].width() * 2; }

  void validate() const {
    for (std::size_t i = 0; i < 5; ++i) {
      detail::require(!levels[i].empty(), ErrorKind::invalid_argument,
                      "pyramid: level B" + std::to_string(i + 1) + " is empty");
      detail::require(levels[i].batch() == levels[0].batch(), ErrorKind::shape_mismatch,
                      "pyramid: batch differs across levels");
      detail::require(levels[i].height() * stride(i) == image_height() &&
                          levels[i].width() * stride(i) == image_width(),
                      ErrorKind::shape_mismatch,
                      "pyramid: level B" + std::to_string(i + 1) + " is not at stride " +
                          std::to_string(stride(i)));
    }
  }

  friend bool operator==(const FeaturePyramid&, const FeaturePyramid&) = default;
};

struct BackboneConfig {
  Scale scale = Scale::N;
  std::array<std::size_t, 5> widths{};
  std::array<std::size_t, 4> depth{};
  std::array<std::size_t, 4> kernel{};

  static BackboneConfig from_preset(Scale s) {
    const auto& p = preset(s);
    return BackboneConfig{s, p.widths, p.manet_depth, p.manet_kernel};
  }
};

// ConvNeck unit: two k x k convs, c -> c. The residual is added by the caller.
template <typename T>
struct ConvNeckParams {
  ConvBlockParams<T> first;
  ConvBlockParams<T> second;
};

template <typename T>
struct ManetParams {
  ConvBlockParams<T> conv1;  // in -> 2c, 1x1
  ConvBlockParams<T> conv2;  // 2c -> c, 1x1
  ConvBlockParams<T> conv3;  // 2c -> c, 1x1
  ConvBlockParams<T> ds_depthwise;  // c -> c, k x k, groups c
  ConvBlockParams<T> ds_pointwise;  // c -> c, 1x1
  std::vector<ConvNeckParams<T>> necks;
  ConvBlockParams<T> conv_o;  // (4+n)c -> 2c, 1x1

  std::size_t branch_channels() const { return conv2.out_channels; }
  std::size_t depth() const { return necks.size(); }
};

template <typename T>
ManetParams<T> random_manet(Rng& rng, std::size_t in, std::size_t c, std::size_t n,
                            std::size_t k) {
  ManetParams<T> p;
  p.conv1 = random_conv<T>(rng, in, 2 * c, 1);
  p.conv2 = random_conv<T>(rng, 2 * c, c, 1);
  p.conv3 = random_conv<T>(rng, 2 * c, c, 1);
  p.ds_depthwise = random_conv<T>(rng, c, c, k, 1, c);
  p.ds_pointwise = random_conv<T>(rng, c, c, 1);
  for (std::size_t i = 0; i < n; ++i)
    p.necks.push_back({random_conv<T>(rng, c, c, k), random_conv<T>(rng, c, c, k)});
  p.conv_o = random_conv<T>(rng, (4 + n) * c, 2 * c, 1);
  return p;
}

template <typename T>
TensorMap<T> add(const TensorMap<T>& a, const TensorMap<T>& b) {
  detail::require(a.same_shape(b), ErrorKind::shape_mismatch, "add: shape mismatch");
  TensorMap<T> out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

// Mixed aggregation block:
//   mid = conv1(x); x1 = conv2(mid); x2 = dsconv(conv3(mid)); (x3, x4) = split(mid)
//   x_{4+i} = neck_i(x_{3+i}) + x_{3+i}
//   out = conv_o(x1 || x2 || ... || x_{4+n})
template <typename T>
TensorMap<T> manet_block(const TensorMap<T>& x, const ManetParams<T>& p) {
  const std::size_t c = p.branch_channels();
  detail::require(x.channels() == p.conv1.in_channels, ErrorKind::shape_mismatch,
                  "manet: input has " + std::to_string(x.channels()) + " channels, expected " +
                      std::to_string(p.conv1.in_channels));
  detail::require(p.conv1.out_channels == 2 * c && p.conv3.out_channels == c &&
                      p.conv_o.in_channels == (4 + p.depth()) * c &&
                      p.conv_o.out_channels == 2 * c,
                  ErrorKind::shape_mismatch, "manet: parameter widths are inconsistent");

  const TensorMap<T> mid = conv2d_block(x, p.conv1);
  std::vector<TensorMap<T>> branches;
  branches.reserve(4 + p.depth());
  branches.push_back(conv2d_block(mid, p.conv2));
  branches.push_back(dsconv_block(conv2d_block(mid, p.conv3), p.ds_depthwise, p.ds_pointwise));
  auto halves = split_channels(mid, {c, c});
  branches.push_back(std::move(halves[0]));
  branches.push_back(std::move(halves[1]));
  for (const auto& neck : p.necks) {
    const TensorMap<T>& prev = branches.back();
    branches.push_back(add(conv2d_block(conv2d_block(prev, neck.first), neck.second), prev));
  }
  return conv2d_block(concat_channels(branches), p.conv_o);
}

template <typename T>
struct BackboneWeights {
  std::array<ConvBlockParams<T>, 5> stage_convs;  // 3x3 stride-2 entry convs
  std::array<ManetParams<T>, 4> manets;           // stages 2..5
};

template <typename T>
BackboneWeights<T> random_backbone(const BackboneConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  BackboneWeights<T> w;
  std::size_t in = 3;
  for (std::size_t s = 0; s < 5; ++s) {
    w.stage_convs[s] = random_conv<T>(rng, in, cfg.widths[s], 3, 2);
    if (s > 0) {
      detail::require(cfg.widths[s] % 2 == 0, ErrorKind::invalid_argument,
                      "backbone: stage widths must be even");
      w.manets[s - 1] = random_manet<T>(rng, cfg.widths[s], cfg.widths[s] / 2, cfg.depth[s - 1],
                                        cfg.kernel[s - 1]);
    }
    in = cfg.widths[s];
  }
  return w;
}

template <typename T>
FeaturePyramid<T> backbone_forward(const TensorMap<T>& image, const BackboneWeights<T>& w) {
  detail::require(image.channels() == 3, ErrorKind::invalid_argument,
                  "backbone: input image must have 3 channels");
  detail::require(image.height() % 32 == 0 && image.width() % 32 == 0,
                  ErrorKind::invalid_argument,
                  "backbone: input size " + std::to_string(image.height()) + "x" +
                      std::to_string(image.width()) + " is not divisible by 32");
  FeaturePyramid<T> pyr;
  TensorMap<T> x = image;
  for (std::size_t s = 0; s < 5; ++s) {
    x = conv2d_block(x, w.stage_convs[s]);
    if (s > 0) x = manet_block(x, w.manets[s - 1]);
    pyr.levels[s] = x;
  }
  return pyr;
}

}  // namespace hyperyolo
