#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"

namespace hyperyolo {

// Dense NCHW feature map, width fastest.
template <typename T>
class TensorMap {
 public:
  using value_type = T;

  TensorMap() = default;

  TensorMap(std::size_t batch, std::size_t channels, std::size_t height, std::size_t width,
            T fill = T(0))
      : batch_(batch), channels_(channels), height_(height), width_(width) {
    detail::require(batch >= 1 && channels >= 1 && height >= 1 && width >= 1,
                    ErrorKind::invalid_argument, "TensorMap: all dimensions must be >= 1");
    data_.assign(batch * channels * height * width, fill);
  }

  TensorMap(std::size_t batch, std::size_t channels, std::size_t height, std::size_t width,
            std::vector<T> data)
      : batch_(batch), channels_(channels), height_(height), width_(width),
        data_(std::move(data)) {
    detail::require(batch >= 1 && channels >= 1 && height >= 1 && width >= 1,
                    ErrorKind::invalid_argument, "TensorMap: all dimensions must be >= 1");
    detail::require(data_.size() == batch * channels * height * width,
                    ErrorKind::shape_mismatch, "TensorMap: data length does not match dimensions");
  }

  std::size_t batch() const { return batch_; }
  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return ((b * channels_ + c) * height_ + y) * width_ + x;
  }

  T& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return data_[index(b, c, y, x)];
  }
  const T& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[index(b, c, y, x)];
  }

  // Contiguous H*W plane of one (image, channel).
  std::span<T> channel(std::size_t b, std::size_t c) {
    return {data_.data() + index(b, c, 0, 0), plane()};
  }
  std::span<const T> channel(std::size_t b, std::size_t c) const {
    return {data_.data() + index(b, c, 0, 0), plane()};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(const TensorMap& o) const {
    return batch_ == o.batch_ && channels_ == o.channels_ && height_ == o.height_ &&
           width_ == o.width_;
  }

  std::string shape_string() const {
    return std::to_string(batch_) + "x" + std::to_string(channels_) + "x" +
           std::to_string(height_) + "x" + std::to_string(width_);
  }

  friend bool operator==(const TensorMap&, const TensorMap&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

// Records which map a vertex table was flattened from.
struct GridMeta {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t batch = 0;

  friend bool operator==(const GridMeta&, const GridMeta&) = default;
};

// Row-major rows x cols matrix. Used for Theta, gradients and dense test-scale
// operators such as pairwise distances and the propagation matrix.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    detail::require(data_.size() == rows * cols, ErrorKind::shape_mismatch,
                    "Matrix: data length does not match dimensions");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Trainable in_channels x out_channels weight of the hypergraph convolution.
template <typename T>
using Theta = Matrix<T>;

// V x C vertex feature table.
template <typename T>
class FeatureMatrix {
 public:
  using value_type = T;

  FeatureMatrix() = default;

  FeatureMatrix(std::size_t vertices, std::size_t channels, T fill = T(0))
      : vertices_(vertices), channels_(channels), data_(vertices * channels, fill) {}

  FeatureMatrix(std::size_t vertices, std::size_t channels, std::vector<T> data,
                std::optional<GridMeta> grid = std::nullopt)
      : vertices_(vertices), channels_(channels), data_(std::move(data)), grid_(grid) {
    detail::require(data_.size() == vertices * channels, ErrorKind::shape_mismatch,
                    "FeatureMatrix: data length does not match V x C");
    if (grid_) check_grid();
  }

  std::size_t vertices() const { return vertices_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t v, std::size_t c) { return data_[v * channels_ + c]; }
  const T& operator()(std::size_t v, std::size_t c) const { return data_[v * channels_ + c]; }

  std::span<T> row(std::size_t v) { return {data_.data() + v * channels_, channels_}; }
  std::span<const T> row(std::size_t v) const {
    return {data_.data() + v * channels_, channels_};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  const std::optional<GridMeta>& grid_meta() const { return grid_; }
  void set_grid_meta(std::optional<GridMeta> g) {
    grid_ = g;
    if (grid_) check_grid();
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  void check_grid() const {
    detail::require(grid_->batch * grid_->height * grid_->width == vertices_,
                    ErrorKind::shape_mismatch,
                    "FeatureMatrix: grid_meta batch*height*width must equal vertex count");
  }

  std::size_t vertices_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> data_;
  std::optional<GridMeta> grid_;
};

template <typename To, typename From>
FeatureMatrix<To> cast(const FeatureMatrix<From>& m) {
  std::vector<To> d(m.data().begin(), m.data().end());
  return FeatureMatrix<To>(m.vertices(), m.channels(), std::move(d), m.grid_meta());
}

template <typename To, typename From>
Matrix<To> cast(const Matrix<From>& m) {
  std::vector<To> d(m.data().begin(), m.data().end());
  return Matrix<To>(m.rows(), m.cols(), std::move(d));
}

}  // namespace hyperyolo
