#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

enum class ResampleMode { nearest_up, avg_down };

// Integer-ratio resampling. nearest_up replicates each pixel into a block;
// avg_down averages non-overlapping blocks.
template <typename T>
TensorMap<T> resample(const TensorMap<T>& x, std::size_t target_h, std::size_t target_w,
                      ResampleMode mode) {
  detail::require(target_h >= 1 && target_w >= 1, ErrorKind::invalid_argument,
                  "resample: target size must be >= 1");
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  if (mode == ResampleMode::nearest_up) {
    detail::require(target_h % h == 0 && target_w % w == 0, ErrorKind::invalid_argument,
                    "resample: nearest_up target must be an integer multiple of the source");
    const std::size_t fy = target_h / h;
    const std::size_t fx = target_w / w;
    TensorMap<T> out(x.batch(), x.channels(), target_h, target_w);
    for (std::size_t b = 0; b < x.batch(); ++b)
      for (std::size_t c = 0; c < x.channels(); ++c) {
        auto src = x.channel(b, c);
        auto dst = out.channel(b, c);
        for (std::size_t y = 0; y < target_h; ++y)
          for (std::size_t xx = 0; xx < target_w; ++xx)
            dst[y * target_w + xx] = src[(y / fy) * w + xx / fx];
      }
    return out;
  }

  detail::require(h % target_h == 0 && w % target_w == 0, ErrorKind::invalid_argument,
                  "resample: avg_down source must be an integer multiple of the target");
  const std::size_t fy = h / target_h;
  const std::size_t fx = w / target_w;
  const T inv = T(1) / static_cast<T>(fy * fx);
  TensorMap<T> out(x.batch(), x.channels(), target_h, target_w);
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto src = x.channel(b, c);
      auto dst = out.channel(b, c);
      for (std::size_t y = 0; y < target_h; ++y)
        for (std::size_t xx = 0; xx < target_w; ++xx) {
          T acc = T(0);
          for (std::size_t dy = 0; dy < fy; ++dy)
            for (std::size_t dx = 0; dx < fx; ++dx)
              acc += src[(y * fy + dy) * w + xx * fx + dx];
          dst[y * target_w + xx] = fy * fx == 1 ? acc : acc * inv;
        }
    }
  return out;
}

// Resamples to the target grid, picking the direction from the size ratio.
template <typename T>
TensorMap<T> resample_to(const TensorMap<T>& x, std::size_t target_h, std::size_t target_w) {
  if (x.height() == target_h && x.width() == target_w) return x;
  if (x.height() < target_h) return resample(x, target_h, target_w, ResampleMode::nearest_up);
  return resample(x, target_h, target_w, ResampleMode::avg_down);
}

template <typename T>
TensorMap<T> concat_channels(std::span<const TensorMap<T>> xs) {
  detail::require(!xs.empty(), ErrorKind::invalid_argument, "concat_channels: empty input list");
  const auto& first = xs.front();
  std::size_t total = 0;
  for (const auto& x : xs) {
    detail::require(x.batch() == first.batch() && x.height() == first.height() &&
                        x.width() == first.width(),
                    ErrorKind::shape_mismatch,
                    "concat_channels: batch/height/width differ between inputs (" +
                        first.shape_string() + " vs " + x.shape_string() + ")");
    total += x.channels();
  }
  TensorMap<T> out(first.batch(), total, first.height(), first.width());
  const std::size_t plane = first.plane();
  for (std::size_t b = 0; b < first.batch(); ++b) {
    std::size_t offset = 0;
    for (const auto& x : xs) {
      auto src = x.data().subspan(b * x.channels() * plane, x.channels() * plane);
      std::copy(src.begin(), src.end(), out.storage().begin() + out.index(b, offset, 0, 0));
      offset += x.channels();
    }
  }
  return out;
}

template <typename T>
TensorMap<T> concat_channels(std::initializer_list<TensorMap<T>> xs) {
  return concat_channels(std::span<const TensorMap<T>>(xs.begin(), xs.size()));
}

template <typename T>
TensorMap<T> concat_channels(const std::vector<TensorMap<T>>& xs) {
  return concat_channels(std::span<const TensorMap<T>>(xs));
}

template <typename T>
std::vector<TensorMap<T>> split_channels(const TensorMap<T>& x,
                                         std::span<const std::size_t> sizes) {
  std::size_t sum = 0;
  for (auto s : sizes) {
    detail::require(s >= 1, ErrorKind::invalid_argument, "split_channels: zero-width slice");
    sum += s;
  }
  detail::require(sum == x.channels(), ErrorKind::shape_mismatch,
                  "split_channels: sizes sum to " + std::to_string(sum) + ", tensor has " +
                      std::to_string(x.channels()) + " channels");
  std::vector<TensorMap<T>> out;
  out.reserve(sizes.size());
  const std::size_t plane = x.plane();
  std::size_t offset = 0;
  for (auto s : sizes) {
    TensorMap<T> part(x.batch(), s, x.height(), x.width());
    for (std::size_t b = 0; b < x.batch(); ++b) {
      auto src = x.data().subspan(x.index(b, offset, 0, 0), s * plane);
      std::copy(src.begin(), src.end(), part.storage().begin() + part.index(b, 0, 0, 0));
    }
    out.push_back(std::move(part));
    offset += s;
  }
  return out;
}

template <typename T>
std::vector<TensorMap<T>> split_channels(const TensorMap<T>& x,
                                         std::initializer_list<std::size_t> sizes) {
  return split_channels(x, std::span<const std::size_t>(sizes.begin(), sizes.size()));
}

// Rows ordered (image, row, column); columns are channels.
template <typename T>
FeatureMatrix<T> to_vertices(const TensorMap<T>& x) {
  const std::size_t plane = x.plane();
  const std::size_t v_count = x.batch() * plane;
  std::vector<T> data(v_count * x.channels());
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto src = x.channel(b, c);
      for (std::size_t p = 0; p < plane; ++p) data[(b * plane + p) * x.channels() + c] = src[p];
    }
  return FeatureMatrix<T>(v_count, x.channels(), std::move(data),
                          GridMeta{x.height(), x.width(), x.batch()});
}

template <typename T>
TensorMap<T> from_vertices(const FeatureMatrix<T>& m) {
  detail::require(m.grid_meta().has_value(), ErrorKind::invalid_argument,
                  "from_vertices: feature matrix carries no grid_meta");
  const GridMeta g = *m.grid_meta();
  TensorMap<T> out(g.batch, m.channels(), g.height, g.width);
  const std::size_t plane = g.height * g.width;
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t c = 0; c < m.channels(); ++c) {
      auto dst = out.channel(b, c);
      for (std::size_t p = 0; p < plane; ++p) dst[p] = m(b * plane + p, c);
    }
  return out;
}

}  // namespace hyperyolo
