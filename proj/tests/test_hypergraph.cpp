#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "hyperyolo/distance.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/hypergraph.hpp"
#include "hyperyolo/numeric.hpp"
#include "hyperyolo/random.hpp"

using namespace hyperyolo;

namespace {

FeatureMatrix<float> three_points() { return FeatureMatrix<float>(3, 1, {0.0f, 1.0f, 5.0f}); }

// Membership by exhaustive distance comparison in double precision.
std::vector<std::vector<VertexId>> ball_oracle(const FeatureMatrix<float>& x, double eps) {
  std::vector<std::vector<VertexId>> edges(x.vertices());
  for (std::size_t v = 0; v < x.vertices(); ++v)
    for (std::size_t u = 0; u < x.vertices(); ++u) {
      double s = 0;
      for (std::size_t c = 0; c < x.channels(); ++c) s += std::pow(double(x(u, c)) - x(v, c), 2);
      if (u == v || std::sqrt(s) < eps) edges[v].push_back(static_cast<VertexId>(u));
    }
  return edges;
}

double double_rows_distance(const FeatureMatrix<float>& x, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t c = 0; c < x.channels(); ++c) s += std::pow(double(x(a, c)) - x(b, c), 2);
  return s;
}

}  // namespace

TEST(Distances, HandCase) {
  FeatureMatrix<float> x(2, 1, {0.0f, 3.0f});
  auto d = pairwise_sq_distances(x);
  EXPECT_EQ(d(0, 0), 0.0f);
  EXPECT_EQ(d(0, 1), 9.0f);
  EXPECT_EQ(d(1, 0), 9.0f);
  EXPECT_EQ(d(1, 1), 0.0f);
}

TEST(Distances, DuplicateRowsGiveExactZero) {
  Rng rng(1);
  auto x = random_features<float>(rng, 70, 13);
  for (std::size_t c = 0; c < 13; ++c) x(65, c) = x(3, c);
  EXPECT_EQ(pairwise_sq_distances(x)(3, 65), 0.0f);
  EXPECT_EQ(pairwise_sq_distances(x)(65, 3), 0.0f);
}

TEST(Distances, BlockedMatchesDoubleLoop) {
  Rng rng(2);
  for (auto [n, c] : {std::pair{64u, 16u}, std::pair{1u, 3u}, std::pair{130u, 37u}, std::pair{200u, 1u}}) {
    auto x = random_features<float>(rng, n, c);
    auto d = pairwise_sq_distances(x);
    double worst = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        EXPECT_EQ(d(a, b), d(b, a));
        worst = std::max(worst, rel_diff(d(a, b), double_rows_distance(x, a, b)));
      }
    EXPECT_LE(worst, 1e-5);
    EXPECT_LE(max_rel_diff(d, pairwise_sq_distances_naive(x)), 1e-5);
  }
}

TEST(Build, ThreePointExample) {
  auto g = build_epsilon_ball_hypergraph(three_points(), EpsilonBallParams{2.0});
  EXPECT_EQ(g.hyperedges(), (std::vector<std::vector<VertexId>>{{0, 1}, {0, 1}, {2}}));
  const auto d = degrees(g);
  EXPECT_EQ(d.vertex_degrees, (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(d.hyperedge_degrees, (std::vector<std::size_t>{2, 2, 1}));
}

TEST(Build, StrictInequalityAtBoundary) {
  // Distance exactly 1 is excluded at eps = 1.
  auto g = build_epsilon_ball_hypergraph(FeatureMatrix<float>(2, 1, {0.0f, 1.0f}), EpsilonBallParams{1.0});
  EXPECT_EQ(g.hyperedge(0).size(), 1u);
}

TEST(Build, EpsilonZeroIsIdentityPattern) {
  Rng rng(3);
  auto g = build_epsilon_ball_hypergraph(random_features<float>(rng, 20, 4), EpsilonBallParams{0.0});
  for (std::size_t v = 0; v < 20; ++v) EXPECT_EQ(g.hyperedge(v).size(), 1u);
  const auto d = degrees(g);
  EXPECT_TRUE(std::all_of(d.vertex_degrees.begin(), d.vertex_degrees.end(), [](auto k) { return k == 1; }));
  EXPECT_TRUE(std::all_of(d.hyperedge_degrees.begin(), d.hyperedge_degrees.end(), [](auto k) { return k == 1; }));
}

TEST(Build, LargeEpsilonIsFullHypergraph) {
  Rng rng(4);
  auto g = build_epsilon_ball_hypergraph(random_features<float>(rng, 17, 4), EpsilonBallParams{100.0});
  const auto d = degrees(g);
  for (auto k : d.vertex_degrees) EXPECT_EQ(k, 17u);
  for (auto k : d.hyperedge_degrees) EXPECT_EQ(k, 17u);
}

TEST(Build, MatchesExhaustiveOracleRandomized) {
  Rng rng(5);
  for (int i = 0; i < 80; ++i) {
    const std::size_t n = 1 + rng.below(90), c = 1 + rng.below(20);
    auto x = random_features<float>(rng, n, c);
    // Keep eps away from realized distances so float and double agree.
    const double eps = rng.uniform(0.0, 1.3 * std::sqrt(2.0 * c / 3.0));
    auto oracle = ball_oracle(x, eps);
    bool near_boundary = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        near_boundary = near_boundary || std::abs(std::sqrt(double_rows_distance(x, a, b)) - eps) < 1e-4;
    if (near_boundary) continue;
    EXPECT_EQ(build_epsilon_ball_hypergraph(x, EpsilonBallParams{eps}).hyperedges(), oracle);
  }
}

TEST(Build, Errors) {
  FeatureMatrix<float> x(2, 1, {0.0f, NAN});
  EXPECT_THROW(build_epsilon_ball_hypergraph(x, EpsilonBallParams{1.0}), Error);
  EXPECT_THROW(build_epsilon_ball_hypergraph(three_points(), EpsilonBallParams{-1.0}), Error);
  EXPECT_THROW(build_epsilon_ball_hypergraph(three_points(), EpsilonBallParams{INFINITY}), Error);
}

TEST(Hypergraph, RejectsMalformedEdges) {
  EXPECT_THROW(Hypergraph(2, {{0, 1}, {}}), Error);
  EXPECT_THROW(Hypergraph(2, {{1, 0}}), Error);
  EXPECT_THROW(Hypergraph(2, {{0, 0, 1}}), Error);
  EXPECT_THROW(Hypergraph(2, {{0, 2}}), Error);
  EXPECT_THROW(Hypergraph(3, {{0, 1}}), Error);
}

TEST(Hypergraph, DegreeSumsEqualIncidences) {
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    auto x = random_features<float>(rng, 1 + rng.below(60), 1 + rng.below(8));
    auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{rng.uniform(0, 2)});
    const auto d = degrees(g);
    EXPECT_EQ(std::accumulate(d.vertex_degrees.begin(), d.vertex_degrees.end(), std::size_t{0}), g.incidence_count());
    EXPECT_EQ(std::accumulate(d.hyperedge_degrees.begin(), d.hyperedge_degrees.end(), std::size_t{0}), g.incidence_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) EXPECT_TRUE(g.contains(v, static_cast<VertexId>(v)));
  }
}

TEST(Hypergraph, TextRoundTrip) {
  Hypergraph g(4, {{0, 2}, {1}, {0, 1, 3}});
  std::stringstream ss;
  write_text(ss, g);
  EXPECT_EQ(ss.str(), "4 3\n0 2\n1\n0 1 3\n");
  EXPECT_EQ(read_text(ss), g);
  std::stringstream bad("3 2\n0 1\n");
  EXPECT_THROW(read_text(bad), Error);
  std::stringstream garbage("3 x\n");
  EXPECT_THROW(read_text(garbage), Error);
}

TEST(HyperConv, ThreePointExample) {
  auto x = three_points();
  auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{2.0});
  Theta<float> theta(1, 1, {1.0f});
  const std::vector<float> expect = {0.5f, 1.5f, 10.0f};
  auto y = hyperconv(x, g, theta);
  EXPECT_EQ(std::vector<float>(y.data().begin(), y.data().end()), expect);
  auto o = hyperconv_oracle(x, g, theta);
  EXPECT_EQ(std::vector<float>(o.data().begin(), o.data().end()), expect);
}

TEST(HyperConv, ZeroThetaIsExactIdentity) {
  Rng rng(7);
  auto x = random_features<float>(rng, 40, 6);
  auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{1.5});
  EXPECT_EQ(hyperconv(x, g, Theta<float>(6, 6)), x);
  EXPECT_EQ(hyperconv_oracle(x, g, Theta<float>(6, 6)), x);
}

TEST(HyperConv, IdentityPatternAndIdentityThetaDoubles) {
  Rng rng(8);
  auto x = random_features<float>(rng, 12, 5);
  auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{0.0});
  auto y = hyperconv(x, g, Theta<float>::identity(5));
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y.data()[i], 2 * x.data()[i]);
  auto o = hyperconv_oracle(x, g, Theta<float>::identity(5));
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_EQ(o.data()[i], 2 * x.data()[i]);
}

TEST(HyperConv, ShapeErrors) {
  auto x = three_points();
  auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{2.0});
  EXPECT_THROW(hyperconv(x, g, Theta<float>(2, 2)), Error);
  EXPECT_THROW(hyperconv(FeatureMatrix<float>(4, 1), g, Theta<float>(1, 1)), Error);
  EXPECT_THROW(hyperconv_oracle(x, g, Theta<float>(1, 2)), Error);
}

TEST(HyperConv, MatchesDenseMatrixProduct) {
  // X + (Dv^-1 H De^-1 H^T)(X Theta) with H built densely and every product
  // accumulated in double.
  Rng rng(9);
  for (int i = 0; i < 25; ++i) {
    const std::size_t n = 1 + rng.below(50), c = 1 + rng.below(10);
    auto x = random_features<float>(rng, n, c);
    auto theta = random_matrix<float>(rng, c, c);
    auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{rng.uniform(0, 2.5)});
    std::vector<double> h(n * n, 0), dv(n, 0), de(n, 0);
    for (std::size_t e = 0; e < n; ++e)
      for (auto v : g.hyperedge(e)) h[v * n + e] = 1;
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t e = 0; e < n; ++e) {
        dv[v] += h[v * n + e];
        de[e] += h[v * n + e];
      }
    std::vector<double> expect(n * c);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0;
        for (std::size_t e = 0; e < n; ++e) {
          if (h[v * n + e] == 0) continue;
          for (std::size_t u = 0; u < n; ++u) {
            if (h[u * n + e] == 0) continue;
            double xt = 0;
            for (std::size_t k = 0; k < c; ++k) xt += double(x(u, k)) * theta(k, j);
            s += xt / (dv[v] * de[e]);
          }
        }
        expect[v * c + j] = x(v, j) + s;
      }
    EXPECT_LE((max_rel_diff<float, double>(hyperconv(x, g, theta).data(), expect)), 1e-5);
  }
}

TEST(HyperConv, OracleEquivalenceProperty) {
  Rng rng(10);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(128), c = 1 + rng.below(32);
    auto x = random_features<float>(rng, n, c);
    auto theta = random_matrix<float>(rng, c, c);
    auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{rng.uniform(0, 1.3) * std::sqrt(2.0 * c / 3)});
    worst = std::max(worst, max_rel_diff(hyperconv(x, g, theta), hyperconv_oracle(x, g, theta)));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(HyperConv, ConstantRowsFixedPoint) {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 1 + rng.below(40), c = 1 + rng.below(6);
    auto theta = random_matrix<double>(rng, c, c);
    auto g = build_epsilon_ball_hypergraph(random_features<float>(rng, n, c), EpsilonBallParams{rng.uniform(0, 2)});
    std::vector<double> bar(c);
    for (auto& b : bar) b = rng.uniform(-1, 1);
    FeatureMatrix<double> x(n, c);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < c; ++j) x(v, j) = bar[j];
    auto y = hyperconv(x, g, theta);
    for (std::size_t j = 0; j < c; ++j) {
      double e = bar[j];
      for (std::size_t k = 0; k < c; ++k) e += bar[k] * theta(k, j);
      for (std::size_t v = 0; v < n; ++v) EXPECT_NEAR(y(v, j), e, 1e-12);
    }
  }
}

TEST(HyperConv, PermutationEquivariance) {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + rng.below(60), c = 1 + rng.below(8);
    auto x = random_features<float>(rng, n, c);
    auto theta = random_matrix<float>(rng, c, c);
    const EpsilonBallParams p{rng.uniform(0, 2.5)};
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
    FeatureMatrix<float> px(n, c);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < c; ++j) px(v, j) = x(perm[v], j);
    auto a = hyperconv(px, build_epsilon_ball_hypergraph(px, p), theta);
    auto b = hyperconv(x, build_epsilon_ball_hypergraph(x, p), theta);
    double worst = 0;
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < c; ++j) worst = std::max(worst, rel_diff(a(v, j), b(perm[v], j)));
    EXPECT_LE(worst, 1e-6);
  }
}

TEST(HyperConv, EpsilonMonotonicity) {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    auto x = random_features<float>(rng, 1 + rng.below(60), 1 + rng.below(8));
    double e1 = rng.uniform(0, 3), e2 = rng.uniform(0, 3);
    if (e1 > e2) std::swap(e1, e2);
    auto g1 = build_epsilon_ball_hypergraph(x, EpsilonBallParams{e1});
    auto g2 = build_epsilon_ball_hypergraph(x, EpsilonBallParams{e2});
    for (std::size_t e = 0; e < g1.edge_count(); ++e) {
      auto a = g1.hyperedge(e), b = g2.hyperedge(e);
      EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST(Gradient, ZeroUpstreamOrZeroInputGivesZero) {
  Rng rng(14);
  auto x = random_features<double>(rng, 10, 3);
  auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{1.0});
  const auto zero_up = hyperconv_grad_theta(x, g, FeatureMatrix<double>(10, 3));
  for (double v : zero_up.data()) EXPECT_EQ(v, 0.0);
  auto up = random_features<double>(rng, 10, 3);
  const auto zero_x = hyperconv_grad_theta(FeatureMatrix<double>(10, 3), g, up);
  for (double v : zero_x.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(hyperconv_grad_theta(x, g, FeatureMatrix<double>(9, 3)), Error);
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  Rng rng(15);
  constexpr double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + rng.below(30), c = 1 + rng.below(6);
    auto x = random_features<double>(rng, n, c);
    auto theta = random_matrix<double>(rng, c, c);
    auto up = random_features<double>(rng, n, c);
    auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{rng.uniform(0, 2)});
    auto f = [&](const Theta<double>& t) {
      auto y = hyperconv(x, g, t);
      double s = 0;
      for (std::size_t k = 0; k < y.size(); ++k) s += up.data()[k] * y.data()[k];
      return s;
    };
    auto grad = hyperconv_grad_theta(x, g, up);
    for (std::size_t a = 0; a < c; ++a)
      for (std::size_t b = 0; b < c; ++b) {
        auto tp = theta, tm = theta;
        tp(a, b) += h;
        tm(a, b) -= h;
        EXPECT_LE(rel_diff(grad(a, b), (f(tp) - f(tm)) / (2 * h)), 1e-4);
      }
  }
}

TEST(LowOrder, ThreePointExample) {
  auto y = graphconv_low_order(three_points(), EpsilonBallParams{2.0}, Theta<float>(1, 1, {1.0f}));
  // A = [[1,1,0],[1,1,0],[0,0,1]], D = diag(2,2,1): rows 0,1 average {0,1}.
  EXPECT_FLOAT_EQ(y(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(y(1, 0), 1.5f);
  EXPECT_FLOAT_EQ(y(2, 0), 10.0f);
}

TEST(LowOrder, ZeroThetaAndSingleVertex) {
  Rng rng(16);
  auto x = random_features<float>(rng, 15, 4);
  EXPECT_EQ(graphconv_low_order(x, EpsilonBallParams{1.0}, Theta<float>(4, 4)), x);
  FeatureMatrix<float> one(1, 1, {3.0f});
  EXPECT_FLOAT_EQ(graphconv_low_order(one, EpsilonBallParams{0.5}, Theta<float>(1, 1, {0.25f}))(0, 0), 3.75f);
  EXPECT_THROW(graphconv_low_order(x, EpsilonBallParams{1.0}, Theta<float>(3, 3)), Error);
}

TEST(LowOrder, MatchesDenseNormalizedAdjacency) {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 1 + rng.below(40), c = 1 + rng.below(6);
    auto x = random_features<float>(rng, n, c);
    auto theta = random_matrix<float>(rng, c, c);
    const double eps = rng.uniform(0, 2.5);
    const auto adj = ball_oracle(x, eps);
    std::vector<double> expect(n * c);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0;
        for (auto u : adj[v]) {
          double xt = 0;
          for (std::size_t k = 0; k < c; ++k) xt += double(x(u, k)) * theta(k, j);
          s += xt / std::sqrt(double(adj[v].size()) * adj[u].size());
        }
        expect[v * c + j] = x(v, j) + s;
      }
    EXPECT_LE((max_rel_diff<float, double>(graphconv_low_order(x, EpsilonBallParams{eps}, theta).data(), expect)), 1e-5);
  }
}

TEST(Propagation, IdentityFullAndThreePoint) {
  Rng rng(18);
  auto x = random_features<float>(rng, 6, 2);
  auto id = propagation_matrix(build_epsilon_ball_hypergraph(x, EpsilonBallParams{0.0}));
  auto full = propagation_matrix(build_epsilon_ball_hypergraph(x, EpsilonBallParams{100.0}));
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) {
      EXPECT_EQ(id(a, b), a == b ? 1.0 : 0.0);
      EXPECT_NEAR(full(a, b), 1.0 / 6, 1e-15);
    }
  auto p3 = propagation_matrix(build_epsilon_ball_hypergraph(three_points(), EpsilonBallParams{2.0}));
  // P X reproduces the propagation term of the hyperconv example (Theta = 1).
  const double xs[3] = {0, 1, 5}, term[3] = {0.5, 0.5, 5};
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0;
    for (std::size_t k = 0; k < 3; ++k) s += p3(r, k) * xs[k];
    EXPECT_DOUBLE_EQ(s, term[r]);
  }
}

TEST(Propagation, RowStochasticAndFaultDetected) {
  Rng rng(19);
  for (int i = 0; i < 30; ++i) {
    auto x = random_features<float>(rng, 1 + rng.below(50), 1 + rng.below(6));
    auto g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{rng.uniform(0, 2.5)});
    auto p = propagation_matrix(g);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0;
      for (double v : p.row(r)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    auto d = degrees(g);
    for (auto& k : d.hyperedge_degrees) k += 1;
    auto bad = propagation_matrix(g, d);
    double s0 = 0;
    for (double v : bad.row(0)) s0 += v;
    EXPECT_GT(std::abs(s0 - 1.0), 1e-3);
  }
}
