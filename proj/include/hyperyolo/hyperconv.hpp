#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hyperyolo/conv.hpp"
#include "hyperyolo/distance.hpp"
#include "hyperyolo/error.hpp"
#include "hyperyolo/hypergraph.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

// Distance threshold for ball construction; the metric is always Euclidean on
// channel vectors.
struct EpsilonBallParams {
  double epsilon = 0.0;
};

namespace detail {

template <typename T>
void require_finite(const FeatureMatrix<T>& x, const char* what) {
  for (T v : x.data())
    if (!std::isfinite(v))
      fail(ErrorKind::invalid_argument,
           std::string(what) + ": feature matrix contains non-finite values");
}

inline void require_epsilon(double eps) {
  require(std::isfinite(eps) && eps >= 0.0, ErrorKind::invalid_argument,
          "epsilon must be finite and >= 0");
}

template <typename T>
void check_conv_shapes(const FeatureMatrix<T>& x, const Hypergraph& g, const Theta<T>& theta,
                       const char* what) {
  require(x.vertices() == g.vertex_count(), ErrorKind::shape_mismatch,
          std::string(what) + ": feature matrix has " + std::to_string(x.vertices()) +
              " rows but hypergraph has " + std::to_string(g.vertex_count()) + " vertices");
  require(theta.rows() == x.channels() && theta.cols() == x.channels(), ErrorKind::shape_mismatch,
          std::string(what) + ": theta must be " + std::to_string(x.channels()) + "x" +
              std::to_string(x.channels()) + " (residual requires matching widths)");
}

template <typename T>
FeatureMatrix<T> times_theta(const FeatureMatrix<T>& x, const Theta<T>& theta) {
  FeatureMatrix<T> y(x.vertices(), theta.cols());
  gemm(x.data().data(), theta.data().data(), y.data().data(), x.vertices(), theta.cols(),
       x.channels());
  return y;
}

}  // namespace detail

// One hyperedge per vertex: ball(v) = { u : ||x_u - x_v|| < eps } plus v itself.
// Coinciding balls are kept as separate hyperedges, so M = N.
template <typename T>
Hypergraph build_epsilon_ball_hypergraph(const FeatureMatrix<T>& x, const EpsilonBallParams& p) {
  detail::require(x.vertices() >= 1, ErrorKind::invalid_argument,
                  "epsilon-ball construction needs at least one vertex");
  detail::require_epsilon(p.epsilon);
  detail::require_finite(x, "epsilon-ball construction");
  const std::size_t n = x.vertices();
  const Matrix<T> d2 = pairwise_sq_distances(x);
  const double eps2 = p.epsilon * p.epsilon;
  std::vector<std::vector<VertexId>> edges(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto row = d2.row(v);
    auto& members = edges[v];
    for (std::size_t u = 0; u < n; ++u)
      if (u == v || static_cast<double>(row[u]) < eps2) members.push_back(static_cast<VertexId>(u));
  }
  return Hypergraph(n, edges);
}

// P * X with P = Dv^-1 H De^-1 H^T, evaluated as vertex -> hyperedge means
// followed by hyperedge -> vertex means.
template <typename T>
FeatureMatrix<T> propagate(const FeatureMatrix<T>& x, const Hypergraph& g) {
  detail::require(x.vertices() == g.vertex_count(), ErrorKind::shape_mismatch,
                  "propagate: vertex count mismatch");
  const std::size_t c = x.channels();
  FeatureMatrix<T> edge_feat(g.edge_count(), c);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    auto acc = edge_feat.row(e);
    const auto members = g.hyperedge(e);
    for (auto v : members) {
      auto xv = x.row(v);
      for (std::size_t k = 0; k < c; ++k) acc[k] += xv[k];
    }
    const T count = static_cast<T>(members.size());
    for (auto& a : acc) a /= count;
  }
  FeatureMatrix<T> out(x.vertices(), c);
  out.set_grid_meta(x.grid_meta());
  for (std::size_t v = 0; v < x.vertices(); ++v) {
    auto acc = out.row(v);
    const auto edges = g.incident(v);
    for (auto e : edges) {
      auto xe = edge_feat.row(e);
      for (std::size_t k = 0; k < c; ++k) acc[k] += xe[k];
    }
    const T count = static_cast<T>(edges.size());
    for (auto& a : acc) a /= count;
  }
  return out;
}

// X + Dv^-1 H De^-1 H^T X Theta, computed sparsely from the membership lists.
template <typename T>
FeatureMatrix<T> hyperconv(const FeatureMatrix<T>& x, const Hypergraph& g, const Theta<T>& theta) {
  detail::check_conv_shapes(x, g, theta, "hyperconv");
  FeatureMatrix<T> out = propagate(detail::times_theta(x, theta), g);
  auto o = out.data();
  auto in = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[i] + o[i];
  out.set_grid_meta(x.grid_meta());
  return out;
}

// Literal two-stage message passing over a dense incidence indicator:
//   x_e  = mean over v in e of (x_v Theta)
//   x'_v = x_v + mean over e containing v of x_e
// Used as the correctness reference for hyperconv.
template <typename T>
FeatureMatrix<T> hyperconv_oracle(const FeatureMatrix<T>& x, const Hypergraph& g,
                                  const Theta<T>& theta) {
  detail::check_conv_shapes(x, g, theta, "hyperconv_oracle");
  const std::size_t n = g.vertex_count();
  const std::size_t m = g.edge_count();
  const std::size_t c = x.channels();
  std::vector<char> incidence(n * m, 0);
  for (std::size_t e = 0; e < m; ++e)
    for (auto v : g.hyperedge(e)) incidence[v * m + e] = 1;

  // x_v Theta for every vertex.
  std::vector<T> xt(n * c, T(0));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t j = 0; j < c; ++j) {
      T s = T(0);
      for (std::size_t i = 0; i < c; ++i) s += x(v, i) * theta(i, j);
      xt[v * c + j] = s;
    }

  std::vector<T> xe(m * c, T(0));
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t count = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!incidence[v * m + e]) continue;
      ++count;
      for (std::size_t j = 0; j < c; ++j) xe[e * c + j] += xt[v * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) xe[e * c + j] /= static_cast<T>(count);
  }

  FeatureMatrix<T> out(n, c);
  out.set_grid_meta(x.grid_meta());
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<T> acc(c, T(0));
    std::size_t count = 0;
    for (std::size_t e = 0; e < m; ++e) {
      if (!incidence[v * m + e]) continue;
      ++count;
      for (std::size_t j = 0; j < c; ++j) acc[j] += xe[e * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out(v, j) = x(v, j) + acc[j] / static_cast<T>(count);
  }
  return out;
}

// Gradient of sum(upstream .* hyperconv(X, g, Theta)) with respect to Theta:
// (P X)^T upstream. Independent of Theta itself.
template <typename T>
Matrix<T> hyperconv_grad_theta(const FeatureMatrix<T>& x, const Hypergraph& g,
                               const FeatureMatrix<T>& upstream) {
  detail::require(x.vertices() == g.vertex_count(), ErrorKind::shape_mismatch,
                  "hyperconv_grad_theta: vertex count mismatch");
  detail::require(upstream.vertices() == x.vertices() && upstream.channels() == x.channels(),
                  ErrorKind::shape_mismatch,
                  "hyperconv_grad_theta: upstream must have the output shape of hyperconv");
  const FeatureMatrix<T> px = propagate(x, g);
  const std::size_t cin = x.channels();
  const std::size_t cout = upstream.channels();
  Matrix<T> grad(cin, cout);
  for (std::size_t v = 0; v < x.vertices(); ++v) {
    auto pv = px.row(v);
    auto uv = upstream.row(v);
    for (std::size_t i = 0; i < cin; ++i) {
      const T a = pv[i];
      auto gi = grad.row(i);
      for (std::size_t j = 0; j < cout; ++j) gi[j] += a * uv[j];
    }
  }
  return grad;
}

// D^-1/2 A D^-1/2 X where the adjacency rows are the membership lists of a
// symmetric neighbourhood structure (each list includes its own vertex).
template <typename T>
FeatureMatrix<T> propagate_low_order(const FeatureMatrix<T>& x, const Hypergraph& adjacency) {
  detail::require(x.vertices() == adjacency.vertex_count() &&
                      adjacency.edge_count() == adjacency.vertex_count(),
                  ErrorKind::shape_mismatch, "propagate_low_order: adjacency must be N x N");
  const std::size_t n = x.vertices();
  const std::size_t c = x.channels();
  std::vector<T> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v)
    inv_sqrt[v] = T(1) / std::sqrt(static_cast<T>(adjacency.hyperedge(v).size()));
  FeatureMatrix<T> out(n, c);
  out.set_grid_meta(x.grid_meta());
  for (std::size_t v = 0; v < n; ++v) {
    auto acc = out.row(v);
    for (auto u : adjacency.hyperedge(v)) {
      const T s = inv_sqrt[u];
      auto xu = x.row(u);
      for (std::size_t k = 0; k < c; ++k) acc[k] += s * xu[k];
    }
    for (auto& a : acc) a *= inv_sqrt[v];
  }
  return out;
}

// Low-order ablation: the eps-ball graph A (A = I when eps = 0) with
// X + D^-1/2 A D^-1/2 X Theta. The identity of the classic renormalized
// adjacency is carried by the residual path.
template <typename T>
FeatureMatrix<T> graphconv_low_order(const FeatureMatrix<T>& x, const EpsilonBallParams& p,
                                     const Theta<T>& theta) {
  const Hypergraph adjacency = build_epsilon_ball_hypergraph(x, p);
  detail::check_conv_shapes(x, adjacency, theta, "graphconv_low_order");
  FeatureMatrix<T> out = propagate_low_order(detail::times_theta(x, theta), adjacency);
  auto o = out.data();
  auto in = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = in[i] + o[i];
  out.set_grid_meta(x.grid_meta());
  return out;
}

// Dense P = Dv^-1 H De^-1 H^T for test-scale assertions. The degree overload
// lets callers inject perturbed degrees.
template <typename T = double>
Matrix<T> propagation_matrix(const Hypergraph& g, const DegreePair& d) {
  const std::size_t n = g.vertex_count();
  Matrix<T> p(n, n);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto members = g.hyperedge(e);
    for (auto u : members) {
      const T w = T(1) / (static_cast<T>(d.vertex_degrees[u]) *
                          static_cast<T>(d.hyperedge_degrees[e]));
      for (auto v : members) p(u, v) += w;
    }
  }
  return p;
}

template <typename T = double>
Matrix<T> propagation_matrix(const Hypergraph& g) {
  return propagation_matrix<T>(g, degrees(g));
}

}  // namespace hyperyolo
