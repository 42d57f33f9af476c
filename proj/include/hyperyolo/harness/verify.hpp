#pragma once

// Property suite behind `hyperyolo verify`. Every check runs on fixed seeds and
// reports its instance count and worst error, so the report is reproducible
// byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/conv.hpp"
#include "hyperyolo/distance.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/neck.hpp"
#include "hyperyolo/numeric.hpp"
#include "hyperyolo/random.hpp"
#include "hyperyolo/reference.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/synth.hpp"
#include "hyperyolo/tensor_ops.hpp"

namespace hyperyolo::harness {

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  // Negative control: adds one to every hyperedge degree when forming the
  // dense propagation matrix, which must break row-stochasticity.
  bool inject_degree_fault = false;
};

struct CheckResult {
  std::string module;
  std::string name;
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::string render() const {
    std::ostringstream os;
    os << "hyperyolo verify seed=" << seed << '\n';
    std::size_t ok = 0;
    for (const auto& c : checks) {
      char line[256];
      std::snprintf(line, sizeof line, "[%s] %-16s %-34s instances=%-5zu max_err=%.3e tol=%.0e\n",
                    c.passed ? "PASS" : "FAIL", c.module.c_str(), c.name.c_str(), c.instances,
                    c.max_error, c.tolerance);
      os << line;
      ok += c.passed ? 1 : 0;
    }
    os << "summary " << ok << "/" << checks.size() << " checks passed\n";
    return os.str();
  }
};

namespace detail {

// Tracks the worst error over many instances of one property.
struct Tally {
  std::size_t instances = 0;
  double worst = 0.0;
  bool violated = false;

  void add(double err) {
    ++instances;
    if (std::isnan(err)) err = INFINITY;
    worst = std::max(worst, err);
  }
  void fail() {
    ++instances;
    violated = true;
  }
};

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Random eps spanning sparse to dense balls for uniform [-1,1] features.
inline double random_epsilon(Rng& rng, std::size_t channels) {
  return rng.uniform(0.0, 1.3) * std::sqrt(2.0 * static_cast<double>(channels) / 3.0);
}

template <typename T>
FeatureMatrix<T> permute_rows(const FeatureMatrix<T>& x, const std::vector<std::size_t>& perm) {
  FeatureMatrix<T> out(x.vertices(), x.channels());
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t c = 0; c < x.channels(); ++c) out(i, c) = x(perm[i], c);
  return out;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

template <typename T>
double sum_upstream_product(const FeatureMatrix<T>& u, const FeatureMatrix<T>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u.data()[i]) * y.data()[i];
  return s;
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& opts) : opts_(opts) { report_.seed = opts.seed; }

  VerifyReport run() {
    tensor_checks();
    hypergraph_checks();
    neck_checks();
    backbone_checks();
    return report_;
  }

 private:
  Rng rng_for(const char* name) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char* p = name; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 1099511628211ull;
    return Rng(stream_seed(opts_.seed, h));
  }

  void record(const char* module, const char* name, const Tally& t, double tol) {
    CheckResult r;
    r.module = module;
    r.name = name;
    r.instances = t.instances;
    r.max_error = t.worst;
    r.tolerance = tol;
    r.passed = !t.violated && t.instances > 0 && t.worst <= tol;
    report_.checks.push_back(r);
  }

  // ---- tensor-core ----
  void tensor_checks() {
    {
      Rng rng = rng_for("conv_matches_direct_oracle");
      Tally t;
      for (int i = 0; i < 24; ++i) {
        const std::size_t groups = pick(rng, 1, 2);
        const std::size_t ic = groups * pick(rng, 1, 3);
        const std::size_t oc = groups * pick(rng, 1, 3);
        const std::size_t k = 2 * pick(rng, 0, 2) + 1;
        const std::size_t stride = pick(rng, 1, 2);
        auto x = random_tensor<float>(rng, pick(rng, 1, 2), ic, pick(rng, 1, 9), pick(rng, 1, 9));
        auto p = random_conv<float>(rng, ic, oc, k, stride, groups,
                                    i % 2 ? Activation::silu : Activation::none);
        t.add(max_rel_diff(conv2d_block(x, p), reference::conv2d(x, p)));
      }
      record("tensor-core", "conv_matches_direct_oracle", t, 1e-6);
    }
    {
      Rng rng = rng_for("conv_linearity");
      Tally t;
      for (int i = 0; i < 16; ++i) {
        const std::size_t ic = pick(rng, 1, 4), oc = pick(rng, 1, 4), h = pick(rng, 2, 8),
                          w = pick(rng, 2, 8), k = 2 * pick(rng, 0, 2) + 1;
        auto p = random_conv<float>(rng, ic, oc, k, pick(rng, 1, 2), 1, Activation::none);
        std::fill(p.bias.begin(), p.bias.end(), 0.0f);
        auto x = random_tensor<float>(rng, 1, ic, h, w);
        auto y = random_tensor<float>(rng, 1, ic, h, w);
        const float a = static_cast<float>(rng.uniform(-2, 2));
        const float b = static_cast<float>(rng.uniform(-2, 2));
        TensorMap<float> mix(1, ic, h, w);
        for (std::size_t j = 0; j < mix.size(); ++j) mix.data()[j] = a * x.data()[j] + b * y.data()[j];
        auto lhs = conv2d_block(mix, p);
        auto cx = conv2d_block(x, p);
        auto cy = conv2d_block(y, p);
        TensorMap<float> rhs = cx;
        for (std::size_t j = 0; j < rhs.size(); ++j) rhs.data()[j] = a * cx.data()[j] + b * cy.data()[j];
        t.add(max_rel_diff(lhs, rhs));
      }
      record("tensor-core", "conv_linearity", t, 1e-5);
    }
    {
      Rng rng = rng_for("same_padding_shape_law");
      Tally t;
      for (std::size_t k = 1; k <= 9; k += 2)
        for (int i = 0; i < 3; ++i) {
          auto x = random_tensor<float>(rng, 1, 2, pick(rng, 1, 12), pick(rng, 1, 12));
          auto y = conv2d_block(x, random_conv<float>(rng, 2, 3, k));
          if (y.height() != x.height() || y.width() != x.width()) t.fail(); else t.add(0.0);
        }
      record("tensor-core", "same_padding_shape_law", t, 0.0);
    }
    {
      Rng rng = rng_for("round_trips_bitwise");
      Tally t;
      for (int i = 0; i < 20; ++i) {
        const std::size_t b = pick(rng, 1, 3), h = pick(rng, 1, 6), w = pick(rng, 1, 6);
        std::vector<TensorMap<float>> parts;
        std::vector<std::size_t> sizes;
        for (std::size_t j = 0, n = pick(rng, 1, 4); j < n; ++j) {
          sizes.push_back(pick(rng, 1, 5));
          parts.push_back(random_tensor<float>(rng, b, sizes.back(), h, w));
        }
        const auto cat = concat_channels(parts);
        const bool split_ok = split_channels(cat, std::span<const std::size_t>(sizes)) == parts;
        const bool vert_ok = from_vertices(to_vertices(cat)) == cat;
        if (split_ok && vert_ok) t.add(0.0); else t.fail();
      }
      record("tensor-core", "round_trips_bitwise", t, 0.0);
    }
    {
      Rng rng = rng_for("translation_covariance");
      Tally t;
      for (int i = 0; i < 10; ++i) {
        const std::size_t k = 2 * pick(rng, 1, 2) + 1, h = pick(rng, 6, 10), w = pick(rng, 6, 10);
        auto p = random_conv<float>(rng, 2, 2, k, 1, 1, Activation::none);
        // Content confined to the interior so the shifted copy loses nothing.
        TensorMap<float> x(1, 2, h, w);
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t y = k; y + k + 1 < h; ++y)
            for (std::size_t xx = k; xx + k + 1 < w; ++xx) x.at(0, c, y, xx) = static_cast<float>(rng.uniform(-1, 1));
        TensorMap<float> shifted(1, 2, h, w);
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t y = 0; y + 1 < h; ++y)
            for (std::size_t xx = 0; xx + 1 < w; ++xx) shifted.at(0, c, y + 1, xx + 1) = x.at(0, c, y, xx);
        auto a = conv2d_block(x, p);
        auto b = conv2d_block(shifted, p);
        double worst = 0.0;
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t y = 0; y + 1 < h; ++y)
            for (std::size_t xx = 0; xx + 1 < w; ++xx)
              worst = std::max(worst, rel_diff(b.at(0, c, y + 1, xx + 1), a.at(0, c, y, xx)));
        t.add(worst);
      }
      record("tensor-core", "translation_covariance", t, 1e-6);
    }
  }

  // ---- hypergraph-core ----
  void hypergraph_checks() {
    {
      Rng rng = rng_for("oracle_equivalence");
      Tally t;
      for (int i = 0; i < 120; ++i) {
        const std::size_t n = pick(rng, 1, 128), c = pick(rng, 1, 32);
        auto x = random_features<float>(rng, n, c);
        auto theta = random_matrix<float>(rng, c, c);
        auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{random_epsilon(rng, c)});
        graphs_.push_back({g, x, theta});
        t.add(max_rel_diff(hyperconv(x, g, theta), hyperconv_oracle(x, g, theta)));
      }
      record("hypergraph-core", "oracle_equivalence", t, 1e-6);
    }
    {
      Rng rng = rng_for("residual_identity");
      Tally t;
      for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick(rng, 1, 64), c = pick(rng, 1, 16);
        auto x = random_features<float>(rng, n, c);
        auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{random_epsilon(rng, c)});
        if (hyperconv(x, g, Theta<float>(c, c)) == x) t.add(0.0); else t.fail();
      }
      record("hypergraph-core", "residual_identity_bitwise", t, 0.0);
    }
    {
      Rng rng = rng_for("epsilon_degeneracy");
      Tally t;
      for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick(rng, 2, 64), c = pick(rng, 1, 16);
        auto x = random_features<float>(rng, n, c);
        auto theta = random_matrix<float>(rng, c, c);
        // eps = 0: identity pattern and X + X Theta.
        auto g0 = build_epsilon_ball_hypergraph(x, EpsilonBallParams{0.0});
        bool pattern = g0.edge_count() == n;
        for (std::size_t v = 0; v < n && pattern; ++v)
          pattern = g0.hyperedge(v).size() == 1 && g0.hyperedge(v)[0] == v;
        FeatureMatrix<double> expect0(n, c);
        for (std::size_t v = 0; v < n; ++v)
          for (std::size_t j = 0; j < c; ++j) {
            double s = x(v, j);
            for (std::size_t k = 0; k < c; ++k) s += static_cast<double>(x(v, k)) * theta(k, j);
            expect0(v, j) = s;
          }
        // eps beyond the diameter: full hypergraph, every row gets the global mean of X Theta.
        auto gf = build_epsilon_ball_hypergraph(x, EpsilonBallParams{4.0 * std::sqrt(static_cast<double>(c)) + 1.0});
        bool full = gf.edge_count() == n;
        for (std::size_t e = 0; e < n && full; ++e) full = gf.hyperedge(e).size() == n;
        FeatureMatrix<double> expectf(n, c);
        for (std::size_t j = 0; j < c; ++j) {
          double mean = 0.0;
          for (std::size_t v = 0; v < n; ++v)
            for (std::size_t k = 0; k < c; ++k) mean += static_cast<double>(x(v, k)) * theta(k, j);
          mean /= static_cast<double>(n);
          for (std::size_t v = 0; v < n; ++v) expectf(v, j) = x(v, j) + mean;
        }
        if (!pattern || !full) {
          t.fail();
          continue;
        }
        graphs_.push_back({g0, x, theta});
        graphs_.push_back({gf, x, theta});
        t.add(std::max(max_rel_diff(hyperconv(x, g0, theta), expect0),
                       max_rel_diff(hyperconv(x, gf, theta), expectf)));
      }
      record("hypergraph-core", "epsilon_degeneracy", t, 1e-6);
    }
    {
      Rng rng = rng_for("center_membership");
      Tally t;
      for (int i = 0; i < 30; ++i) {
        const std::size_t n = pick(rng, 1, 96), c = pick(rng, 1, 16);
        auto x = random_features<float>(rng, n, c);
        auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{random_epsilon(rng, c)});
        const auto d = degrees(g);
        bool ok = g.edge_count() == n;
        for (std::size_t v = 0; v < n && ok; ++v) ok = g.contains(v, static_cast<VertexId>(v));
        ok = ok && std::all_of(d.vertex_degrees.begin(), d.vertex_degrees.end(), [](auto k) { return k >= 1; });
        ok = ok && std::accumulate(d.vertex_degrees.begin(), d.vertex_degrees.end(), std::size_t{0}) ==
                       std::accumulate(d.hyperedge_degrees.begin(), d.hyperedge_degrees.end(), std::size_t{0});
        if (ok) t.add(0.0); else t.fail();
      }
      record("hypergraph-core", "center_membership_and_degrees", t, 0.0);
    }
    {
      Rng rng = rng_for("epsilon_monotonicity");
      Tally t;
      for (int i = 0; i < 60; ++i) {
        const std::size_t n = pick(rng, 1, 96), c = pick(rng, 1, 16);
        auto x = random_features<float>(rng, n, c);
        double e1 = random_epsilon(rng, c), e2 = random_epsilon(rng, c);
        if (e1 > e2) std::swap(e1, e2);
        auto g1 = build_epsilon_ball_hypergraph(x, EpsilonBallParams{e1});
        auto g2 = build_epsilon_ball_hypergraph(x, EpsilonBallParams{e2});
        bool ok = true;
        for (std::size_t e = 0; e < n && ok; ++e) {
          auto a = g1.hyperedge(e);
          auto b = g2.hyperedge(e);
          ok = std::includes(b.begin(), b.end(), a.begin(), a.end());
        }
        if (ok) t.add(0.0); else t.fail();
      }
      record("hypergraph-core", "epsilon_monotonicity", t, 0.0);
    }
    {
      Rng rng = rng_for("permutation_equivariance");
      Tally t;
      for (int i = 0; i < 60; ++i) {
        const std::size_t n = pick(rng, 1, 96), c = pick(rng, 1, 16);
        auto x = random_features<float>(rng, n, c);
        auto theta = random_matrix<float>(rng, c, c);
        const EpsilonBallParams p{random_epsilon(rng, c)};
        const auto perm = random_permutation(rng, n);
        auto px = permute_rows(x, perm);
        auto lhs = hyperconv(px, build_epsilon_ball_hypergraph(px, p), theta);
        auto rhs = permute_rows(hyperconv(x, build_epsilon_ball_hypergraph(x, p), theta), perm);
        t.add(max_rel_diff(lhs, rhs));
      }
      record("hypergraph-core", "permutation_equivariance", t, 1e-6);
    }
    {
      Rng rng = rng_for("distance_symmetry");
      Tally t;
      for (int i = 0; i < 12; ++i) {
        const std::size_t n = pick(rng, 1, 200), c = pick(rng, 1, 40);
        auto x = random_features<float>(rng, n, c);
        auto blocked = pairwise_sq_distances(x);
        auto naive = pairwise_sq_distances_naive(x);
        bool ok = true;
        for (std::size_t a = 0; a < n && ok; ++a) {
          ok = blocked(a, a) == 0.0f;
          for (std::size_t b = 0; b < n && ok; ++b) ok = blocked(a, b) == blocked(b, a);
        }
        if (!ok) t.fail(); else t.add(max_rel_diff(blocked, naive));
      }
      record("hypergraph-core", "distance_symmetry_blocked_vs_naive", t, 1e-5);
    }
    {
      Tally t;
      for (std::uint64_t s = 0; s < 5; ++s) {
        ClusterSpec spec;
        spec.seed = stream_seed(opts_.seed, 1000 + s);
        const auto data = synthesize_clusters<float>(spec);
        auto g = build_epsilon_ball_hypergraph(data.points, EpsilonBallParams{6.0});
        const double before = within_cluster_variance(data.points, data.labels);
        const double after = within_cluster_variance(propagate(data.points, g), data.labels);
        // Error is the variance ratio; strict decrease means ratio < 1.
        if (after < before) t.add(after / before); else t.fail();
      }
      record("hypergraph-core", "smoothing_on_separated_clusters", t, 1.0);
    }
    {
      Rng rng = rng_for("gradient_check");
      Tally t;
      constexpr double h = 1e-5;
      for (int i = 0; i < 24; ++i) {
        const std::size_t n = pick(rng, 2, 48), c = pick(rng, 1, 8);
        auto x = random_features<double>(rng, n, c);
        auto theta = random_matrix<double>(rng, c, c);
        auto up = random_features<double>(rng, n, c);
        auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{random_epsilon(rng, c)});
        const auto grad = hyperconv_grad_theta(x, g, up);
        double worst = 0.0;
        for (std::size_t a = 0; a < c; ++a)
          for (std::size_t b = 0; b < c; ++b) {
            auto tp = theta, tm = theta;
            tp(a, b) += h;
            tm(a, b) -= h;
            const double fd = (sum_upstream_product(up, hyperconv(x, g, tp)) -
                               sum_upstream_product(up, hyperconv(x, g, tm))) / (2 * h);
            worst = std::max(worst, rel_diff(grad(a, b), fd));
          }
        t.add(worst);
      }
      record("hypergraph-core", "gradient_matches_finite_diff", t, 1e-4);
    }
    {
      Rng rng = rng_for("low_order_dense_oracle");
      Tally t;
      for (int i = 0; i < 20; ++i) {
        const std::size_t n = pick(rng, 1, 64), c = pick(rng, 1, 12);
        auto x = random_features<float>(rng, n, c);
        auto theta = random_matrix<float>(rng, c, c);
        const double eps = random_epsilon(rng, c);
        t.add(max_rel_diff(graphconv_low_order(x, EpsilonBallParams{eps}, theta),
                           reference::graphconv_dense(x, reference::epsilon_adjacency(x, eps), theta)));
      }
      record("hypergraph-core", "low_order_matches_dense_oracle", t, 1e-5);
    }
    {
      // Row sums of every hypergraph built above, plus the constant-input law.
      Rng rng = rng_for("row_stochastic");
      Tally rows;
      Tally fixed;
      for (const auto& inst : graphs_) {
        const auto& g = inst.graph;
        if (g.vertex_count() > 128) continue;
        DegreePair d = degrees(g);
        if (opts_.inject_degree_fault)
          for (auto& k : d.hyperedge_degrees) k += 1;
        const auto p = propagation_matrix<double>(g, d);
        double worst = 0.0;
        for (std::size_t r = 0; r < p.rows(); ++r) {
          double s = 0.0;
          bool nonneg = true;
          for (double v : p.row(r)) {
            s += v;
            nonneg = nonneg && v >= 0.0;
          }
          worst = std::max(worst, nonneg ? std::abs(s - 1.0) : INFINITY);
        }
        rows.add(worst);

        // Evaluated at 64-bit: in 32-bit the mean of up to 128 equal addends
        // already drifts by several ulps, which is rounding, not the law.
        const std::size_t c = inst.x.channels();
        const Theta<double> theta = cast<double>(inst.theta);
        std::vector<double> bar(c);
        for (auto& v : bar) v = rng.uniform(-1, 1);
        FeatureMatrix<double> constant(g.vertex_count(), c);
        for (std::size_t v = 0; v < g.vertex_count(); ++v)
          for (std::size_t j = 0; j < c; ++j) constant(v, j) = bar[j];
        FeatureMatrix<double> expect(g.vertex_count(), c);
        for (std::size_t j = 0; j < c; ++j) {
          double s = bar[j];
          for (std::size_t k = 0; k < c; ++k) s += bar[k] * theta(k, j);
          for (std::size_t v = 0; v < g.vertex_count(); ++v) expect(v, j) = s;
        }
        fixed.add(max_rel_diff(hyperconv(constant, g, theta), expect));
      }
      record("hypergraph-core", "row_stochastic_propagation", rows, 1e-6);
      record("hypergraph-core", "constant_input_fixed_point", fixed, 1e-6);
    }
  }

  // ---- hgcscs-neck ----
  void neck_checks() {
    {
      Rng rng = rng_for("neck_shape_law");
      Tally t;
      for (auto scale : {Scale::N, Scale::S, Scale::M, Scale::L})
        for (std::size_t size : {64u, 96u}) {
          auto cfg = NeckConfig::from_preset(scale);
          auto w = random_neck<float>(cfg, rng.bits());
          auto pyr = random_pyramid<float>(rng, cfg.widths, 1, size, size);
          auto out = hyperc2net(pyr, cfg, w);
          const auto& wd = cfg.widths;
          const bool ok = out.n3.height() == size / 8 && out.n4.height() == size / 16 &&
                          out.n5.height() == size / 32 && out.n3.width() == size / 8 &&
                          out.n3.channels() == wd[2] && out.n4.channels() == wd[3] &&
                          out.n5.channels() == wd[4];
          if (ok) t.add(0.0); else t.fail();
        }
      record("hgcscs-neck", "end_to_end_shape_law", t, 0.0);
    }
    NeckConfig small;
    small.widths = {4, 6, 8, 10, 12};
    small.hyper_channels = 8;
    small.epsilon = 2.5;
    {
      Rng rng = rng_for("mode_none_transparency");
      Tally t;
      for (int i = 0; i < 4; ++i) {
        auto cfg = small;
        cfg.mode = CorrelationMode::none;
        auto w = random_neck<float>(cfg, rng.bits());
        auto pyr = random_pyramid<float>(rng, cfg.widths, pick(rng, 1, 2), 64, 64);
        auto s = semantic_scatter(semantic_collect(pyr, cfg, w), pyr, cfg, w);
        if (hyperc2net(pyr, cfg, w) == bottom_up(s[0], s[1], s[2], w)) t.add(0.0); else t.fail();
      }
      record("hgcscs-neck", "mode_none_transparency", t, 0.0);
    }
    {
      Rng rng = rng_for("batch_independence");
      Tally t;
      for (auto mode : {CorrelationMode::high_order, CorrelationMode::low_order}) {
        auto cfg = small;
        cfg.mode = mode;
        auto w = random_neck<float>(cfg, rng.bits());
        auto a = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
        auto b = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
        FeaturePyramid<float> both;
        for (std::size_t l = 0; l < 5; ++l) {
          std::vector<float> d(a[l].data().begin(), a[l].data().end());
          d.insert(d.end(), b[l].data().begin(), b[l].data().end());
          both[l] = TensorMap<float>(2, a[l].channels(), a[l].height(), a[l].width(), std::move(d));
        }
        auto joint = hyperc2net(both, cfg, w);
        auto oa = hyperc2net(a, cfg, w);
        auto ob = hyperc2net(b, cfg, w);
        double worst = 0.0;
        for (auto [jm, am, bm] : {std::tuple{&joint.n3, &oa.n3, &ob.n3}, std::tuple{&joint.n4, &oa.n4, &ob.n4},
                                  std::tuple{&joint.n5, &oa.n5, &ob.n5}}) {
          std::vector<float> stacked(am->data().begin(), am->data().end());
          stacked.insert(stacked.end(), bm->data().begin(), bm->data().end());
          worst = std::max(worst, max_rel_diff<float, float>(jm->data(), stacked));
        }
        t.add(worst);
      }
      record("hgcscs-neck", "batch_independence_per_image", t, 1e-6);
    }
    {
      Rng rng = rng_for("epsilon_zero_collapse");
      Tally t;
      for (int i = 0; i < 4; ++i) {
        auto cfg = small;
        cfg.epsilon = 0.0;
        auto w = random_neck<float>(cfg, rng.bits());
        auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
        auto high = hyperc2net(pyr, cfg, w);
        // Mode none pipeline with an explicit X + X Theta stage.
        auto mixed = semantic_collect(pyr, cfg, w);
        FeatureMatrix<float> linear = mixed;
        for (std::size_t v = 0; v < mixed.vertices(); ++v)
          for (std::size_t j = 0; j < mixed.channels(); ++j) {
            float s = 0.0f;
            for (std::size_t k = 0; k < mixed.channels(); ++k) s += mixed(v, k) * w.theta(k, j);
            linear(v, j) = mixed(v, j) + s;
          }
        auto s = semantic_scatter(linear, pyr, cfg, w);
        auto ref = bottom_up(s[0], s[1], s[2], w);
        t.add(std::max({max_rel_diff(high.n3, ref.n3), max_rel_diff(high.n4, ref.n4),
                        max_rel_diff(high.n5, ref.n5)}));
      }
      record("hgcscs-neck", "epsilon_zero_collapse", t, 1e-6);
    }
    {
      Rng rng = rng_for("collecting_set_plumbing");
      Tally t;
      auto pyr = random_pyramid<float>(rng, small.widths, 1, 64, 64);
      std::vector<std::array<bool, 5>> sets = {{true, true, true, true, true},
                                               {false, false, true, true, true},
                                               {false, false, false, true, false},
                                               {true, false, false, false, true}};
      for (const auto& set : sets) {
        auto cfg = small;
        cfg.collecting_set = set;
        auto w = random_neck<float>(cfg, rng.bits());
        auto mixed = semantic_collect(pyr, cfg, w);
        auto out = hyperc2net(pyr, cfg, w);
        const bool ok = w.fuse.in_channels == cfg.collected_channels() &&
                        mixed.vertices() == 16 && mixed.channels() == cfg.hyper_channels &&
                        out.n3.shape_string() == "1x8x8x8" && out.n4.shape_string() == "1x10x4x4" &&
                        out.n5.shape_string() == "1x12x2x2";
        if (ok) t.add(0.0); else t.fail();
      }
      record("hgcscs-neck", "collecting_set_plumbing", t, 0.0);
    }
  }

  // ---- backbone-toy ----
  void backbone_checks() {
    {
      Rng rng = rng_for("manet_width_law");
      Tally t;
      for (std::size_t n = 1; n <= 4; ++n) {
        const std::size_t c = pick(rng, 1, 4), in = pick(rng, 1, 6);
        auto p = random_manet<float>(rng, in, c, n, 2 * pick(rng, 0, 2) + 1);
        auto x = random_tensor<float>(rng, 1, in, 5, 7);
        auto y = manet_block(x, p);
        const bool ok = y.channels() == 2 * c && y.height() == 5 && y.width() == 7 &&
                        p.conv_o.in_channels == (4 + n) * c;
        if (ok) t.add(0.0); else t.fail();
      }
      record("backbone-toy", "manet_width_and_depth_law", t, 0.0);
    }
    {
      Rng rng = rng_for("manet_residual_law");
      Tally t;
      for (std::size_t n = 1; n <= 3; ++n) {
        const std::size_t c = 3;
        auto p = random_manet<float>(rng, 4, c, n, 3);
        for (auto& neck : p.necks) {
          neck.first = zero_conv<float>(c, c, 3, 1, 1, Activation::none);
          neck.second = zero_conv<float>(c, c, 3, 1, 1, Activation::none);
        }
        // With every ConvNeck zeroed, the chain repeats X4, so conv_o sees X4
        // n extra times; equivalently, fold those copies into the X4 weights.
        auto folded = p;
        folded.necks.clear();
        folded.conv_o = zero_conv<float>(4 * c, 2 * c, 1);
        for (std::size_t o = 0; o < 2 * c; ++o) {
          folded.conv_o.bias[o] = p.conv_o.bias[o];
          for (std::size_t i = 0; i < 4 * c; ++i) {
            float wsum = p.conv_o.weights[o * (4 + n) * c + i];
            if (i >= 3 * c)
              for (std::size_t r = 1; r <= n; ++r)
                wsum += p.conv_o.weights[o * (4 + n) * c + i + r * c];
            folded.conv_o.weights[o * 4 * c + i] = wsum;
          }
        }
        auto x = random_tensor<float>(rng, 1, 4, 6, 6);
        t.add(max_rel_diff(manet_block(x, p), manet_block(x, folded)));
      }
      record("backbone-toy", "manet_residual_law", t, 1e-5);
    }
    {
      Tally t;
      BackboneConfig cfg;
      cfg.widths = {4, 8, 8, 16, 16};
      cfg.depth = {1, 2, 2, 1};
      cfg.kernel = {3, 5, 5, 3};
      Rng rng = rng_for("backbone_determinism");
      auto img = random_tensor<float>(rng, 1, 3, 64, 64, 0.0, 1.0);
      auto a = backbone_forward(img, random_backbone<float>(cfg, opts_.seed));
      auto b = backbone_forward(img, random_backbone<float>(cfg, opts_.seed));
      bool ok = a == b;
      for (std::size_t i = 0; i < 5 && ok; ++i)
        ok = a[i].channels() == cfg.widths[i] && a[i].height() == 64 / FeaturePyramid<float>::stride(i);
      if (ok) t.add(0.0); else t.fail();
      record("backbone-toy", "determinism_and_stage_widths", t, 0.0);
    }
  }

  struct GraphInstance {
    Hypergraph graph;
    FeatureMatrix<float> x;
    Theta<float> theta;
  };

  VerifyOptions opts_;
  VerifyReport report_;
  std::vector<GraphInstance> graphs_;
};

}  // namespace detail

inline VerifyReport run_verify(const VerifyOptions& opts = {}) {
  return detail::Suite(opts).run();
}

}  // namespace hyperyolo::harness
