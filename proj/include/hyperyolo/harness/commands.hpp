#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/distance.hpp"
#include "hyperyolo/harness/settings.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/hyt1.hpp"
#include "hyperyolo/image.hpp"
#include "hyperyolo/neck.hpp"
#include "hyperyolo/random.hpp"
#include "hyperyolo/synth.hpp"
#include "hyperyolo/weights_io.hpp"

namespace hyperyolo::harness {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename Range>
std::string join(const Range& r) {
  std::string out;
  for (const auto& v : r) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

struct ValueStats {
  double min = 0, max = 0, mean = 0, stddev = 0;
};

template <typename T>
ValueStats value_stats(std::span<const T> v) {
  ValueStats s;
  if (v.empty()) return s;
  s.min = s.max = static_cast<double>(v[0]);
  double sum = 0.0;
  for (T x : v) {
    s.min = std::min(s.min, static_cast<double>(x));
    s.max = std::max(s.max, static_cast<double>(x));
    sum += static_cast<double>(x);
  }
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (T x : v) sq += (static_cast<double>(x) - s.mean) * (static_cast<double>(x) - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(v.size()));
  return s;
}

template <typename T>
std::string describe(const std::string& label, const TensorMap<T>& x) {
  const auto s = value_stats<T>(x.data());
  return label + " shape=" + x.shape_string() + " min=" + fmt(s.min) + " max=" + fmt(s.max) +
         " mean=" + fmt(s.mean) + " std=" + fmt(s.stddev);
}

inline std::string describe(const Hypergraph& g) {
  const auto d = degrees(g);
  auto line = [](const char* what, const std::vector<std::size_t>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double sum = 0.0;
    for (auto k : v) sum += static_cast<double>(k);
    return std::string(what) + "_degree min=" + std::to_string(*lo) +
           " mean=" + fmt(sum / static_cast<double>(v.size())) + " max=" + std::to_string(*hi);
  };
  return "vertices=" + std::to_string(g.vertex_count()) +
         " hyperedges=" + std::to_string(g.edge_count()) +
         " incidences=" + std::to_string(g.incidence_count()) + " " +
         line("vertex", d.vertex_degrees) + " " + line("hyperedge", d.hyperedge_degrees);
}

// ---- demo ----

// Runs backbone and neck on one image, writes report.txt, heatmap_pre.pgm,
// heatmap_post.pgm and n3/n4/n5.hyt into the output directory, and echoes the
// report to `out`.
inline int run_demo(const DemoOptions& o, std::ostream& out) {
  const NeckConfig& cfg = o.neck;
  const BackboneConfig bcfg = BackboneConfig::from_preset(cfg.scale);

  TensorMap<float> image;
  std::string source;
  if (o.input.empty()) {
    Rng rng(o.seed);
    image = random_tensor<float>(rng, 1, 3, o.size, o.size, 0.0, 1.0);
    source = "noise";
  } else {
    image = load_pgm_ppm(o.input);
    source = o.input;
  }

  const auto bw = random_backbone<float>(bcfg, o.seed);
  NeckWeights<float> nw = random_neck<float>(cfg, o.seed + 1);
  if (!o.weights.empty()) load_weights(o.weights, weight_entries(nw));

  const FeaturePyramid<float> pyr = backbone_forward(image, bw);
  NeckTrace<float> trace;
  const NeckOutputs<float> n = hyperc2net(pyr, cfg, nw, &trace);

  std::ostringstream r;
  r << "config scale=" << to_string(cfg.scale) << " mode=" << to_string(cfg.mode)
    << " epsilon=" << fmt(cfg.epsilon) << " hyper_channels=" << cfg.hyper_channels
    << " target_stride=" << cfg.target_stride << " pooling=" << to_string(cfg.pooling)
    << " collecting_set=" << cfg.collecting_set_string()
    << " collected_channels=" << cfg.collected_channels() << '\n';
  r << "backbone widths=" << join(bcfg.widths) << " manet_depth=" << join(bcfg.depth)
    << " manet_kernel=" << join(bcfg.kernel) << '\n';
  r << "seed " << o.seed << '\n';
  r << describe("input source=" + source, image) << '\n';
  for (std::size_t i = 0; i < 5; ++i) r << describe("B" + std::to_string(i + 1), pyr[i]) << '\n';
  const auto grid = trace.x_mixed.grid_meta();
  r << "vertices " << trace.x_mixed.vertices() << " grid=" << grid->height << "x" << grid->width
    << " channels=" << trace.x_mixed.channels() << '\n';
  for (std::size_t i = 0; i < trace.hypergraphs.size(); ++i)
    r << "hypergraph " << i << ' ' << describe(trace.hypergraphs[i]) << '\n';
  if (trace.hypergraphs.empty()) r << "hypergraph none (mode none)\n";
  const TensorMap<float> pre = from_vertices(trace.x_mixed);
  const TensorMap<float> post = from_vertices(trace.x_hyper);
  r << describe("X_mixed", pre) << '\n';
  r << describe("X_hyper", post) << '\n';
  r << describe("N3", n.n3) << '\n' << describe("N4", n.n4) << '\n' << describe("N5", n.n5) << '\n';

  const std::filesystem::path dir(o.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  hyperyolo::detail::require(!ec, ErrorKind::io, "cannot create " + dir.string());
  export_heatmap(pre, dir / "heatmap_pre.pgm");
  export_heatmap(post, dir / "heatmap_post.pgm");
  hyt1::save_tensor(dir / "n3.hyt", n.n3);
  hyt1::save_tensor(dir / "n4.hyt", n.n4);
  hyt1::save_tensor(dir / "n5.hyt", n.n5);
  r << "artifacts report.txt heatmap_pre.pgm heatmap_post.pgm n3.hyt n4.hyt n5.hyt\n";

  const std::string report = r.str();
  std::ofstream f(dir / "report.txt", std::ios::binary);
  f << report;
  hyperyolo::detail::require(static_cast<bool>(f), ErrorKind::io, "cannot write report.txt");
  out << report;
  return 0;
}

// ---- bench ----

template <typename F>
double best_ns(std::size_t reps, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  return best;
}

// CSV rows: kernel,V,C,ns_per_op (best of the repetitions, one op = one full
// call). The blocked/naive ratio per V goes to `diag`.
inline int run_bench(const BenchOptions& o, std::ostream& out, std::ostream& diag) {
  out << "kernel,V,C,ns_per_op\n";
  Rng rng(o.seed);
  for (std::size_t v : o.vertices) {
    const auto x = random_features<float>(rng, v, o.channels);
    const auto theta = random_matrix<float>(rng, o.channels, o.channels, -0.1, 0.1);
    float sink = 0.0f;
    const double naive = best_ns(o.repetitions, [&] { sink += pairwise_sq_distances_naive(x)(0, v - 1); });
    const double blocked = best_ns(o.repetitions, [&] { sink += pairwise_sq_distances(x)(0, v - 1); });
    Hypergraph g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{o.epsilon});
    const double build = best_ns(o.repetitions, [&] {
      g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{o.epsilon});
    });
    const double conv = best_ns(o.repetitions, [&] { sink += hyperconv(x, g, theta)(0, 0); });
    const std::string tail = "," + std::to_string(v) + "," + std::to_string(o.channels) + ",";
    out << "pairwise_naive" << tail << fmt(naive) << '\n';
    out << "pairwise_blocked" << tail << fmt(blocked) << '\n';
    out << "build_hypergraph" << tail << fmt(build) << '\n';
    out << "hyperconv" << tail << fmt(conv) << '\n';
    diag << "blocked/naive V=" << v << " ratio=" << fmt(blocked / naive)
         << (std::isfinite(sink) ? "" : " (non-finite)") << '\n';
  }
  return 0;
}

// ---- ablate ----

// CSV rows per mode. Returns 1 when a well-posed spec (separation > eps >
// spread) fails to reduce variance under either correlation mode, or when
// mode none is not exactly the identity.
inline int run_ablate(const AblateOptions& o, std::ostream& out, std::ostream& diag) {
  const auto rows = run_ablation(o.clusters, o.epsilon);
  out << "mode,epsilon,variance_in,variance_out,ratio\n";
  for (const auto& r : rows)
    out << to_string(r.mode) << ',' << fmt(r.epsilon) << ',' << fmt(r.variance_in) << ','
        << fmt(r.variance_out) << ',' << fmt(r.ratio) << '\n';
  const double none = rows[0].ratio, low = rows[1].ratio, high = rows[2].ratio;
  diag << "high_order<=low_order " << (high <= low ? "yes" : "no") << '\n';
  bool ok = none == 1.0;
  const bool posed = o.clusters.center_separation > o.epsilon && o.epsilon > o.clusters.intra_spread;
  if (posed) ok = ok && low < 1.0 && high < 1.0;
  if (!ok) diag << "ablate: variance law violated\n";
  return ok ? 0 : 1;
}

// ---- fit ----

inline int run_fit(const FitConfig& o, std::ostream& out, std::ostream& diag) {
  const FitResult res = fit_theta_demo(o);
  out << "step,loss\n";
  for (std::size_t i = 0; i < res.losses.size(); ++i) out << i << ',' << fmt(res.losses[i]) << '\n';
  if (res.diverged) {
    diag << "fit: diverged at step " << res.losses.size() - 1 << '\n';
    return 1;
  }
  diag << "reduction=" << fmt(res.reduction()) << " monotone=" << (res.monotone() ? "yes" : "no")
       << '\n';
  return 0;
}

// ---- hypergraph ----

inline int run_hypergraph(const HypergraphOptions& o, std::ostream& out) {
  const FeatureMatrix<float> x = hyt1::to_feature_matrix(hyt1::load(o.input));
  const Hypergraph g = build_epsilon_ball_hypergraph(x, EpsilonBallParams{o.epsilon});
  out << "epsilon=" << fmt(o.epsilon) << " channels=" << x.channels() << ' ' << describe(g) << '\n';
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    hyperyolo::detail::require(static_cast<bool>(f), ErrorKind::io, "cannot write " + o.out);
    write_text(f, g);
  }
  return 0;
}

}  // namespace hyperyolo::harness
