#pragma once

// Weight directories: a manifest.txt with one "name file" pair per line and
// one HYT1 file per tensor. Loading fills an already-shaped weight set, so the
// architecture always comes from the config and the files only carry values.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/conv.hpp"
#include "hyperyolo/error.hpp"
#include "hyperyolo/hyt1.hpp"
#include "hyperyolo/neck.hpp"

namespace hyperyolo {

template <typename T>
struct WeightEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<T>* values;
};

namespace detail {

template <typename T>
void add_conv(std::vector<WeightEntry<T>>& out, const std::string& name, ConvBlockParams<T>& p) {
  out.push_back({name + ".weight",
                 {static_cast<std::uint32_t>(p.out_channels),
                  static_cast<std::uint32_t>(p.in_channels / p.groups),
                  static_cast<std::uint32_t>(p.kernel), static_cast<std::uint32_t>(p.kernel)},
                 &p.weights});
  out.push_back({name + ".bias", {static_cast<std::uint32_t>(p.out_channels)}, &p.bias});
}

}  // namespace detail

template <typename T>
std::vector<WeightEntry<T>> weight_entries(NeckWeights<T>& w) {
  std::vector<WeightEntry<T>> out;
  detail::add_conv(out, "neck.fuse", w.fuse);
  out.push_back({"neck.theta",
                 {static_cast<std::uint32_t>(w.theta.rows()),
                  static_cast<std::uint32_t>(w.theta.cols())},
                 &w.theta.storage()});
  for (std::size_t i = 0; i < 3; ++i)
    detail::add_conv(out, "neck.scatter" + std::to_string(i + 3), w.scatter[i]);
  for (std::size_t i = 0; i < 2; ++i) {
    detail::add_conv(out, "neck.down" + std::to_string(i + 3), w.down[i]);
    detail::add_conv(out, "neck.merge" + std::to_string(i + 4), w.merge[i]);
  }
  return out;
}

template <typename T>
std::vector<WeightEntry<T>> weight_entries(BackboneWeights<T>& w) {
  std::vector<WeightEntry<T>> out;
  for (std::size_t s = 0; s < 5; ++s) {
    const std::string stage = "backbone.stage" + std::to_string(s + 1);
    detail::add_conv(out, stage + ".down", w.stage_convs[s]);
    if (s == 0) continue;
    auto& m = w.manets[s - 1];
    detail::add_conv(out, stage + ".manet.conv1", m.conv1);
    detail::add_conv(out, stage + ".manet.conv2", m.conv2);
    detail::add_conv(out, stage + ".manet.conv3", m.conv3);
    detail::add_conv(out, stage + ".manet.ds_depthwise", m.ds_depthwise);
    detail::add_conv(out, stage + ".manet.ds_pointwise", m.ds_pointwise);
    for (std::size_t i = 0; i < m.necks.size(); ++i) {
      const std::string neck = stage + ".manet.neck" + std::to_string(i + 1);
      detail::add_conv(out, neck + ".a", m.necks[i].first);
      detail::add_conv(out, neck + ".b", m.necks[i].second);
    }
    detail::add_conv(out, stage + ".manet.conv_o", m.conv_o);
  }
  return out;
}

template <typename T>
void save_weights(const std::filesystem::path& dir, const std::vector<WeightEntry<T>>& entries) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  detail::require(static_cast<bool>(manifest), ErrorKind::io,
                  "weights: cannot write manifest in " + dir.string());
  for (const auto& e : entries) {
    const std::string file = e.name + ".hyt";
    std::vector<float> data(e.values->begin(), e.values->end());
    hyt1::save(dir / file, e.dims, data);
    manifest << e.name << ' ' << file << '\n';
  }
}

template <typename T>
void load_weights(const std::filesystem::path& dir, const std::vector<WeightEntry<T>>& entries) {
  std::ifstream manifest(dir / "manifest.txt");
  detail::require(static_cast<bool>(manifest), ErrorKind::io,
                  "weights: cannot open manifest in " + dir.string());
  std::map<std::string, std::string> files;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, file;
    detail::require(static_cast<bool>(ls >> name >> file), ErrorKind::format,
                    "weights: malformed manifest line '" + line + "'");
    files[name] = file;
  }
  for (const auto& e : entries) {
    auto it = files.find(e.name);
    detail::require(it != files.end(), ErrorKind::format,
                    "weights: manifest has no entry for " + e.name);
    hyt1::RawTensor t = hyt1::load(dir / it->second);
    detail::require(t.dims == e.dims, ErrorKind::shape_mismatch,
                    "weights: " + e.name + " has unexpected dimensions");
    e.values->assign(t.data.begin(), t.data.end());
  }
}

}  // namespace hyperyolo
