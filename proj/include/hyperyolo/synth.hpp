#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/neck.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

// Synthetic clustered point set. Each point is its cluster center plus a
// per-coordinate uniform offset in [-intra_spread, intra_spread].
struct ClusterSpec {
  std::size_t k_clusters = 4;
  std::size_t points_per_cluster = 32;
  std::size_t dim = 8;
  double center_separation = 20.0;
  double intra_spread = 1.0;
  std::uint64_t seed = 7;

  void validate() const {
    using detail::require;
    require(k_clusters >= 1 && points_per_cluster >= 1 && dim >= 1, ErrorKind::invalid_argument,
            "cluster spec: counts must be >= 1");
    require(std::isfinite(center_separation) && std::isfinite(intra_spread) &&
                intra_spread >= 0.0,
            ErrorKind::invalid_argument, "cluster spec: separation/spread must be finite");
    require(center_separation > 2.0 * intra_spread, ErrorKind::invalid_argument,
            "cluster spec: center_separation must exceed 2 x intra_spread");
  }
};

template <typename T>
struct ClusteredPoints {
  FeatureMatrix<T> points;
  std::vector<std::size_t> labels;
  Matrix<double> centers;  // k x dim
};

// Centers sit on scaled coordinate axes when k <= dim (pairwise distance
// separation * sqrt(2)); otherwise they are rejection-sampled.
template <typename T>
ClusteredPoints<T> synthesize_clusters(const ClusterSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t k = spec.k_clusters;
  const std::size_t d = spec.dim;
  Matrix<double> centers(k, d);
  if (k <= d) {
    for (std::size_t i = 0; i < k; ++i) centers(i, i) = spec.center_separation;
  } else {
    const double box = spec.center_separation * static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        for (std::size_t j = 0; j < d; ++j) centers(i, j) = rng.uniform(0.0, box);
        placed = true;
        for (std::size_t o = 0; o < i && placed; ++o) {
          double s = 0.0;
          for (std::size_t j = 0; j < d; ++j) s += std::pow(centers(i, j) - centers(o, j), 2);
          placed = std::sqrt(s) >= spec.center_separation;
        }
      }
      detail::require(placed, ErrorKind::invalid_argument,
                      "cluster spec: could not place well-separated centers");
    }
  }
  ClusteredPoints<T> out;
  out.centers = centers;
  out.points = FeatureMatrix<T>(k * spec.points_per_cluster, d);
  out.labels.reserve(k * spec.points_per_cluster);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t p = 0; p < spec.points_per_cluster; ++p) {
      const std::size_t v = out.labels.size();
      for (std::size_t j = 0; j < d; ++j)
        out.points(v, j) =
            static_cast<T>(centers(c, j) + rng.uniform(-spec.intra_spread, spec.intra_spread));
      out.labels.push_back(c);
    }
  return out;
}

// Mean squared distance of each row to its cluster's mean row.
template <typename T>
double within_cluster_variance(const FeatureMatrix<T>& x, const std::vector<std::size_t>& labels) {
  detail::require(labels.size() == x.vertices(), ErrorKind::shape_mismatch,
                  "within_cluster_variance: one label per row required");
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  const std::size_t c = x.channels();
  std::vector<double> mean(k * c, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t v = 0; v < x.vertices(); ++v) {
    ++count[labels[v]];
    for (std::size_t j = 0; j < c; ++j) mean[labels[v] * c + j] += static_cast<double>(x(v, j));
  }
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t j = 0; j < c; ++j)
      if (count[l]) mean[l * c + j] /= static_cast<double>(count[l]);
  double total = 0.0;
  for (std::size_t v = 0; v < x.vertices(); ++v)
    for (std::size_t j = 0; j < c; ++j) {
      const double diff = static_cast<double>(x(v, j)) - mean[labels[v] * c + j];
      total += diff * diff;
    }
  return total / static_cast<double>(x.vertices());
}

struct AblationRow {
  CorrelationMode mode;
  double epsilon;
  double variance_in;
  double variance_out;
  double ratio;
};

// Propagation term of each correlation mode with Theta = I: the identity for
// none, D^-1/2 A D^-1/2 X for low order and Dv^-1 H De^-1 H^T X for high order.
template <typename T>
FeatureMatrix<T> propagation_output(const FeatureMatrix<T>& x, CorrelationMode mode,
                                    double epsilon) {
  if (mode == CorrelationMode::none) return x;
  const Hypergraph g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{epsilon});
  return mode == CorrelationMode::low_order ? propagate_low_order(x, g) : propagate(x, g);
}

inline std::vector<AblationRow> run_ablation(const ClusterSpec& spec, double epsilon) {
  detail::require_epsilon(epsilon);
  const auto data = synthesize_clusters<float>(spec);
  const double var_in = within_cluster_variance(data.points, data.labels);
  detail::require(var_in > 0.0, ErrorKind::invalid_argument,
                  "ablation: spec produces zero within-cluster variance");
  std::vector<AblationRow> rows;
  for (auto mode : {CorrelationMode::none, CorrelationMode::low_order, CorrelationMode::high_order}) {
    const double var_out =
        within_cluster_variance(propagation_output(data.points, mode, epsilon), data.labels);
    rows.push_back({mode, epsilon, var_in, var_out, var_out / var_in});
  }
  return rows;
}

struct FitConfig {
  ClusterSpec clusters;
  double epsilon = 6.0;
  double step = 1e-3;
  std::size_t iterations = 200;
};

struct FitResult {
  std::vector<double> losses;  // losses[i] is the loss before update i; last entry is final
  Matrix<double> theta;
  bool diverged = false;

  double reduction() const { return losses.empty() ? 0.0 : 1.0 - losses.back() / losses.front(); }

  // Non-increasing up to rel_slack; once converged, successive losses differ
  // only in the last few bits.
  bool monotone(double rel_slack = 1e-12) const {
    for (std::size_t i = 1; i < losses.size(); ++i)
      if (losses[i] > losses[i - 1] * (1.0 + rel_slack)) return false;
    return true;
  }
};

// Per-vertex target rows: twice the vertex's cluster center.
inline FeatureMatrix<double> cluster_targets(const ClusteredPoints<double>& data) {
  FeatureMatrix<double> t(data.points.vertices(), data.points.channels());
  for (std::size_t v = 0; v < t.vertices(); ++v)
    for (std::size_t j = 0; j < t.channels(); ++j) t(v, j) = 2.0 * data.centers(data.labels[v], j);
  return t;
}

// Mean over vertices of the squared row error.
inline double fit_loss(const FeatureMatrix<double>& out, const FeatureMatrix<double>& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.data()[i] - target.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(out.vertices());
}

// Gradient descent on Theta of hyperconv against per-cluster target rows,
// starting from Theta = 0, using the analytic Theta gradient.
inline FitResult fit_theta_demo(const FitConfig& cfg) {
  detail::require(cfg.step > 0.0 && std::isfinite(cfg.step), ErrorKind::invalid_argument,
                  "fit: step must be positive");
  const auto data = synthesize_clusters<double>(cfg.clusters);
  const FeatureMatrix<double> target = cluster_targets(data);
  const Hypergraph g = build_epsilon_ball_hypergraph(data.points, EpsilonBallParams{cfg.epsilon});
  const std::size_t c = data.points.channels();
  const double n = static_cast<double>(data.points.vertices());

  FitResult res;
  res.theta = Matrix<double>(c, c);
  for (std::size_t it = 0; it <= cfg.iterations; ++it) {
    const FeatureMatrix<double> out = hyperconv(data.points, g, res.theta);
    const double loss = fit_loss(out, target);
    res.losses.push_back(loss);
    if (!std::isfinite(loss) || (it > 0 && loss > res.losses.front() * 1e6)) {
      res.diverged = true;
      break;
    }
    if (it == cfg.iterations) break;
    FeatureMatrix<double> upstream(out.vertices(), c);
    for (std::size_t i = 0; i < upstream.size(); ++i)
      upstream.data()[i] = 2.0 / n * (out.data()[i] - target.data()[i]);
    const Matrix<double> grad = hyperconv_grad_theta(data.points, g, upstream);
    for (std::size_t i = 0; i < grad.size(); ++i) res.theta.data()[i] -= cfg.step * grad.data()[i];
  }
  return res;
}

}  // namespace hyperyolo
