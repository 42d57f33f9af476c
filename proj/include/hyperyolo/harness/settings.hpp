#pragma once

// Command settings: key=value pairs from a config file followed by command-line
// overrides. Later entries win.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/neck.hpp"
#include "hyperyolo/synth.hpp"

namespace hyperyolo::harness {

using Settings = std::vector<std::pair<std::string, std::string>>;

inline Settings read_settings_file(const std::string& path) {
  std::ifstream is(path);
  detail::require(static_cast<bool>(is), ErrorKind::io, "cannot open config " + path);
  return read_key_values(is);
}

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  hyperyolo::detail::require(ec == std::errc{} && ptr == v.data() + v.size(),
                             ErrorKind::invalid_argument,
                             key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const auto n = parse_u64(key, v);
  hyperyolo::detail::require(n >= 1, ErrorKind::invalid_argument, key + ": must be >= 1");
  return static_cast<std::size_t>(n);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  hyperyolo::detail::require(used == v.size() && !v.empty() && std::isfinite(d),
                             ErrorKind::invalid_argument,
                             key + ": expected a finite number, got '" + v + "'");
  return d;
}

inline std::vector<std::size_t> parse_counts(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(key, item));
  hyperyolo::detail::require(!out.empty(), ErrorKind::invalid_argument, key + ": empty list");
  return out;
}

// Returns true when `key` is a cluster-spec key and was applied.
inline bool apply_cluster_setting(ClusterSpec& spec, const std::string& key, const std::string& v) {
  if (key == "k_clusters") spec.k_clusters = parse_count(key, v);
  else if (key == "points_per_cluster") spec.points_per_cluster = parse_count(key, v);
  else if (key == "dim") spec.dim = parse_count(key, v);
  else if (key == "center_separation") spec.center_separation = parse_real(key, v);
  else if (key == "intra_spread") spec.intra_spread = parse_real(key, v);
  else return false;
  return true;
}

[[noreturn]] inline void unknown_key(const char* command, const std::string& key) {
  hyperyolo::detail::fail(ErrorKind::invalid_argument,
                          std::string(command) + ": unknown setting '" + key + "'");
}

}  // namespace detail

struct DemoOptions {
  NeckConfig neck;
  std::uint64_t seed = 1;
  std::size_t size = 256;
  std::string input;        // PGM/PPM path; empty means seeded noise
  std::string weights;      // neck weight directory to load; empty means seeded init
  std::string out_dir = "demo_out";
};

struct BenchOptions {
  std::vector<std::size_t> vertices = {256, 1024, 4096};
  std::size_t channels = 256;
  std::size_t repetitions = 3;
  double epsilon = 8.0;
  std::uint64_t seed = 1;
};

struct AblateOptions {
  ClusterSpec clusters;
  double epsilon = 6.0;
};

struct HypergraphOptions {
  std::string input;  // rank-2 HYT1 matrix
  double epsilon = 8.0;
  std::string out;    // optional text dump of the hyperedges
};

inline DemoOptions demo_options(const Settings& s) {
  DemoOptions o;
  for (const auto& [k, v] : s)
    if (k == "scale") apply_neck_setting(o.neck, k, v);
  for (const auto& [k, v] : s) {
    if (k == "scale") continue;
    if (k == "seed") o.seed = detail::parse_u64(k, v);
    else if (k == "size") o.size = detail::parse_count(k, v);
    else if (k == "input") o.input = v;
    else if (k == "weights") o.weights = v;
    else if (k == "out") o.out_dir = v;
    else apply_neck_setting(o.neck, k, v);
  }
  o.neck.validate();
  hyperyolo::detail::require(o.size % 32 == 0, ErrorKind::invalid_argument,
                             "demo: size must be divisible by 32");
  return o;
}

inline BenchOptions bench_options(const Settings& s) {
  BenchOptions o;
  for (const auto& [k, v] : s) {
    if (k == "seed") o.seed = detail::parse_u64(k, v);
    else if (k == "vertices") o.vertices = detail::parse_counts(k, v);
    else if (k == "channels") o.channels = detail::parse_count(k, v);
    else if (k == "repetitions") o.repetitions = detail::parse_count(k, v);
    else if (k == "epsilon") o.epsilon = detail::parse_real(k, v);
    else detail::unknown_key("bench", k);
  }
  hyperyolo::detail::require_epsilon(o.epsilon);
  return o;
}

inline AblateOptions ablate_options(const Settings& s) {
  AblateOptions o;
  for (const auto& [k, v] : s) {
    if (k == "seed") o.clusters.seed = detail::parse_u64(k, v);
    else if (k == "epsilon") o.epsilon = detail::parse_real(k, v);
    else if (!detail::apply_cluster_setting(o.clusters, k, v)) detail::unknown_key("ablate", k);
  }
  o.clusters.validate();
  hyperyolo::detail::require_epsilon(o.epsilon);
  return o;
}

inline FitConfig fit_options(const Settings& s) {
  FitConfig o;
  for (const auto& [k, v] : s) {
    if (k == "seed") o.clusters.seed = detail::parse_u64(k, v);
    else if (k == "epsilon") o.epsilon = detail::parse_real(k, v);
    else if (k == "step") o.step = detail::parse_real(k, v);
    else if (k == "iterations") o.iterations = detail::parse_count(k, v);
    else if (!detail::apply_cluster_setting(o.clusters, k, v)) detail::unknown_key("fit", k);
  }
  o.clusters.validate();
  hyperyolo::detail::require_epsilon(o.epsilon);
  return o;
}

inline HypergraphOptions hypergraph_options(const Settings& s) {
  HypergraphOptions o;
  for (const auto& [k, v] : s) {
    if (k == "input") o.input = v;
    else if (k == "epsilon") o.epsilon = detail::parse_real(k, v);
    else if (k == "out") o.out = v;
    else if (k == "seed") continue;
    else detail::unknown_key("hypergraph", k);
  }
  hyperyolo::detail::require(!o.input.empty(), ErrorKind::invalid_argument,
                             "hypergraph: an input matrix is required");
  hyperyolo::detail::require_epsilon(o.epsilon);
  return o;
}

}  // namespace hyperyolo::harness
