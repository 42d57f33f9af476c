#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/conv.hpp"
#include "hyperyolo/error.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/presets.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/tensor.hpp"
#include "hyperyolo/tensor_ops.hpp"

namespace hyperyolo {

enum class CorrelationMode { none, low_order, high_order };
enum class Pooling { per_image, cross_batch };

constexpr std::string_view to_string(CorrelationMode m) {
  switch (m) {
    case CorrelationMode::none: return "none";
    case CorrelationMode::low_order: return "low_order";
    case CorrelationMode::high_order: return "high_order";
  }
  return "?";
}

constexpr std::string_view to_string(Pooling p) {
  return p == Pooling::per_image ? "per_image" : "cross_batch";
}

inline CorrelationMode parse_mode(std::string_view s) {
  if (s == "none") return CorrelationMode::none;
  if (s == "low_order" || s == "low") return CorrelationMode::low_order;
  if (s == "high_order" || s == "high") return CorrelationMode::high_order;
  detail::fail(ErrorKind::invalid_argument, "unknown mode '" + std::string(s) + "'");
}

inline Pooling parse_pooling(std::string_view s) {
  if (s == "per_image") return Pooling::per_image;
  if (s == "cross_batch") return Pooling::cross_batch;
  detail::fail(ErrorKind::invalid_argument, "unknown pooling '" + std::string(s) + "'");
}

struct NeckConfig {
  Scale scale = Scale::S;
  std::array<std::size_t, 5> widths = preset(Scale::S).widths;
  std::array<bool, 5> collecting_set = {true, true, true, true, true};
  std::size_t target_stride = 16;
  double epsilon = preset(Scale::S).epsilon;
  std::size_t hyper_channels = preset(Scale::S).hyper_channels;
  CorrelationMode mode = CorrelationMode::high_order;
  Pooling pooling = Pooling::per_image;

  static NeckConfig from_preset(Scale s) {
    NeckConfig c;
    c.scale = s;
    c.widths = preset(s).widths;
    c.epsilon = preset(s).epsilon;
    c.hyper_channels = preset(s).hyper_channels;
    return c;
  }

  std::size_t collected_channels() const {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < 5; ++i)
      if (collecting_set[i]) sum += widths[i];
    return sum;
  }

  std::string collecting_set_string() const {
    std::string out;
    for (std::size_t i = 0; i < 5; ++i)
      if (collecting_set[i]) out += (out.empty() ? "B" : ",B") + std::to_string(i + 1);
    return out;
  }

  void validate() const {
    bool any = false;
    for (bool b : collecting_set) any = any || b;
    detail::require(any, ErrorKind::invalid_argument, "neck: collecting set is empty");
    detail::require(hyper_channels > 0, ErrorKind::invalid_argument,
                    "neck: hyper_channels must be > 0");
    detail::require_epsilon(epsilon);
    detail::require(target_stride >= 1, ErrorKind::invalid_argument,
                    "neck: target_stride must be >= 1");
  }
};

// Applies one key=value setting. "scale" resets the scale-dependent fields.
inline void apply_neck_setting(NeckConfig& cfg, std::string_view key, std::string_view value) {
  const std::string v(value);
  auto to_double = [&](std::string_view k) {
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      detail::fail(ErrorKind::invalid_argument,
                   "config: '" + std::string(k) + "' expects a number, got '" + v + "'");
    }
  };
  if (key == "scale") {
    const auto keep_mode = cfg.mode;
    const auto keep_pool = cfg.pooling;
    const auto keep_set = cfg.collecting_set;
    const auto keep_stride = cfg.target_stride;
    cfg = NeckConfig::from_preset(parse_scale(v));
    cfg.mode = keep_mode;
    cfg.pooling = keep_pool;
    cfg.collecting_set = keep_set;
    cfg.target_stride = keep_stride;
  } else if (key == "mode") {
    cfg.mode = parse_mode(v);
  } else if (key == "epsilon") {
    cfg.epsilon = to_double(key);
  } else if (key == "target_stride") {
    const double d = to_double(key);
    detail::require(d >= 1 && d == std::floor(d), ErrorKind::invalid_argument,
                    "config: target_stride must be a positive integer");
    cfg.target_stride = static_cast<std::size_t>(d);
  } else if (key == "pooling") {
    cfg.pooling = parse_pooling(v);
  } else if (key == "collecting_set") {
    std::array<bool, 5> set{};
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty() && (item[0] == 'B' || item[0] == 'b')) item.erase(0, 1);
      detail::require(item.size() == 1 && item[0] >= '1' && item[0] <= '5',
                      ErrorKind::invalid_argument,
                      "config: collecting_set entries must be B1..B5, got '" + v + "'");
      set[static_cast<std::size_t>(item[0] - '1')] = true;
    }
    cfg.collecting_set = set;
  } else {
    detail::fail(ErrorKind::invalid_argument, "config: unknown key '" + std::string(key) + "'");
  }
}

// key=value lines; '#' starts a comment. The scale key is applied first so
// that explicit settings override the preset regardless of line order.
inline std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    detail::require(eq != std::string::npos, ErrorKind::format,
                    "config line " + std::to_string(lineno) + ": expected key=value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline NeckConfig parse_neck_config(std::istream& is) {
  const auto kv = read_key_values(is);
  NeckConfig cfg;
  for (const auto& [k, v] : kv)
    if (k == "scale") apply_neck_setting(cfg, k, v);
  for (const auto& [k, v] : kv)
    if (k != "scale") apply_neck_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

inline NeckConfig load_neck_config(const std::string& path) {
  std::ifstream is(path);
  detail::require(static_cast<bool>(is), ErrorKind::io, "cannot open config " + path);
  return parse_neck_config(is);
}

template <typename T>
struct NeckWeights {
  ConvBlockParams<T> fuse;                    // collected -> hyper, 1x1
  Theta<T> theta;                             // hyper x hyper
  std::array<ConvBlockParams<T>, 3> scatter;  // (hyper + W_i) -> W_i, 1x1, i = 3,4,5
  std::array<ConvBlockParams<T>, 2> down;     // W3 -> W3, W4 -> W4, 3x3 stride 2
  std::array<ConvBlockParams<T>, 2> merge;    // (W3 + W4) -> W4, (W4 + W5) -> W5, 1x1
};

template <typename T>
NeckWeights<T> random_neck(const NeckConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const auto& w = cfg.widths;
  const std::size_t hc = cfg.hyper_channels;
  NeckWeights<T> nw;
  nw.fuse = random_conv<T>(rng, cfg.collected_channels(), hc, 1);
  nw.theta = Theta<T>(hc, hc);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hc));
  for (auto& v : nw.theta.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  for (std::size_t i = 0; i < 3; ++i) nw.scatter[i] = random_conv<T>(rng, hc + w[2 + i], w[2 + i], 1);
  nw.down[0] = random_conv<T>(rng, w[2], w[2], 3, 2);
  nw.down[1] = random_conv<T>(rng, w[3], w[3], 3, 2);
  nw.merge[0] = random_conv<T>(rng, w[2] + w[3], w[3], 1);
  nw.merge[1] = random_conv<T>(rng, w[3] + w[4], w[4], 1);
  return nw;
}

template <typename T>
struct NeckOutputs {
  TensorMap<T> n3;
  TensorMap<T> n4;
  TensorMap<T> n5;

  friend bool operator==(const NeckOutputs&, const NeckOutputs&) = default;
};

// Every selected level is resampled onto the target-stride grid, concatenated
// along channels, reduced by the fuse conv and flattened into vertices.
template <typename T>
FeatureMatrix<T> semantic_collect(const FeaturePyramid<T>& pyr, const NeckConfig& cfg,
                                  const NeckWeights<T>& w) {
  cfg.validate();
  pyr.validate();
  const std::size_t ih = pyr.image_height();
  const std::size_t iw = pyr.image_width();
  const std::size_t t = cfg.target_stride;
  detail::require(ih % t == 0 && iw % t == 0, ErrorKind::invalid_argument,
                  "collect: image size not divisible by target stride " + std::to_string(t));
  const std::size_t th = ih / t;
  const std::size_t tw = iw / t;
  std::vector<TensorMap<T>> parts;
  for (std::size_t i = 0; i < 5; ++i) {
    if (!cfg.collecting_set[i]) continue;
    const std::size_t s = FeaturePyramid<T>::stride(i);
    detail::require(s % t == 0 || t % s == 0, ErrorKind::invalid_argument,
                    "collect: stride " + std::to_string(s) + " cannot be resampled to stride " +
                        std::to_string(t) + " by an integer factor");
    detail::require(pyr[i].channels() == cfg.widths[i], ErrorKind::shape_mismatch,
                    "collect: B" + std::to_string(i + 1) + " width does not match the config");
    parts.push_back(resample_to(pyr[i], th, tw));
  }
  return to_vertices(conv2d_block(concat_channels(parts), w.fuse));
}

namespace detail {

template <typename T>
FeatureMatrix<T> correlate(const FeatureMatrix<T>& x, const NeckConfig& cfg,
                           const NeckWeights<T>& w, std::vector<Hypergraph>* built) {
  const EpsilonBallParams p{cfg.epsilon};
  if (cfg.mode == CorrelationMode::low_order) {
    const Hypergraph adjacency = build_epsilon_ball_hypergraph(x, p);
    check_conv_shapes(x, adjacency, w.theta, "neck low_order");
    FeatureMatrix<T> out = propagate_low_order(times_theta(x, w.theta), adjacency);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += x.data()[i];
    if (built) built->push_back(adjacency);
    return out;
  }
  const Hypergraph g = build_epsilon_ball_hypergraph(x, p);
  FeatureMatrix<T> out = hyperconv(x, g, w.theta);
  if (built) built->push_back(g);
  return out;
}

}  // namespace detail

// Optional `built` receives every constructed structure, one per pooled point set.
template <typename T>
FeatureMatrix<T> hypergraph_compute(const FeatureMatrix<T>& x_mixed, const NeckConfig& cfg,
                                    const NeckWeights<T>& w,
                                    std::vector<Hypergraph>* built = nullptr) {
  detail::require(x_mixed.channels() == cfg.hyper_channels, ErrorKind::shape_mismatch,
                  "hypergraph_compute: input has " + std::to_string(x_mixed.channels()) +
                      " channels, config expects " + std::to_string(cfg.hyper_channels));
  if (cfg.mode == CorrelationMode::none) return x_mixed;

  const std::size_t images = x_mixed.grid_meta() ? x_mixed.grid_meta()->batch : 1;
  if (cfg.pooling == Pooling::cross_batch || images == 1) {
    FeatureMatrix<T> out = detail::correlate(x_mixed, cfg, w, built);
    out.set_grid_meta(x_mixed.grid_meta());
    return out;
  }

  const std::size_t per = x_mixed.vertices() / images;
  const std::size_t c = x_mixed.channels();
  FeatureMatrix<T> out(x_mixed.vertices(), c);
  for (std::size_t b = 0; b < images; ++b) {
    const auto first = x_mixed.data().begin() + static_cast<std::ptrdiff_t>(b * per * c);
    FeatureMatrix<T> part(per, c, std::vector<T>(first, first + static_cast<std::ptrdiff_t>(per * c)));
    const FeatureMatrix<T> res = detail::correlate(part, cfg, w, built);
    std::copy(res.data().begin(), res.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(b * per * c));
  }
  out.set_grid_meta(x_mixed.grid_meta());
  return out;
}

// Returns S3, S4, S5: the high-order map resampled to strides 8/16/32,
// concatenated with B3/B4/B5 and fused back to their widths.
template <typename T>
std::array<TensorMap<T>, 3> semantic_scatter(const FeatureMatrix<T>& x_hyper,
                                             const FeaturePyramid<T>& pyr, const NeckConfig& cfg,
                                             const NeckWeights<T>& w) {
  detail::require(x_hyper.grid_meta().has_value(), ErrorKind::invalid_argument,
                  "scatter: high-order features carry no grid_meta");
  detail::require(x_hyper.channels() == cfg.hyper_channels, ErrorKind::shape_mismatch,
                  "scatter: channel mismatch");
  const TensorMap<T> grid = from_vertices(x_hyper);
  std::array<TensorMap<T>, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    const TensorMap<T>& b = pyr[2 + i];
    TensorMap<T> up = resample_to(grid, b.height(), b.width());
    out[i] = conv2d_block(concat_channels({std::move(up), b}), w.scatter[i]);
  }
  return out;
}

template <typename T>
NeckOutputs<T> bottom_up(const TensorMap<T>& s3, const TensorMap<T>& s4, const TensorMap<T>& s5,
                         const NeckWeights<T>& w) {
  detail::require(s3.height() == 2 * s4.height() && s4.height() == 2 * s5.height() &&
                      s3.width() == 2 * s4.width() && s4.width() == 2 * s5.width(),
                  ErrorKind::shape_mismatch, "bottom_up: inputs are not at strides 8/16/32");
  NeckOutputs<T> out;
  out.n3 = s3;
  out.n4 = conv2d_block(concat_channels({conv2d_block(out.n3, w.down[0]), s4}), w.merge[0]);
  out.n5 = conv2d_block(concat_channels({conv2d_block(out.n4, w.down[1]), s5}), w.merge[1]);
  return out;
}

// Intermediate values of one neck pass, for reporting.
template <typename T>
struct NeckTrace {
  FeatureMatrix<T> x_mixed;
  FeatureMatrix<T> x_hyper;
  std::vector<Hypergraph> hypergraphs;
};

template <typename T>
NeckOutputs<T> hyperc2net(const FeaturePyramid<T>& pyr, const NeckConfig& cfg,
                          const NeckWeights<T>& w, NeckTrace<T>* trace = nullptr) {
  FeatureMatrix<T> mixed = semantic_collect(pyr, cfg, w);
  std::vector<Hypergraph> built;
  FeatureMatrix<T> hyper = hypergraph_compute(mixed, cfg, w, trace ? &built : nullptr);
  auto s = semantic_scatter(hyper, pyr, cfg, w);
  NeckOutputs<T> out = bottom_up(s[0], s[1], s[2], w);
  if (trace) {
    trace->x_mixed = std::move(mixed);
    trace->x_hyper = std::move(hyper);
    trace->hypergraphs = std::move(built);
  }
  return out;
}

}  // namespace hyperyolo
