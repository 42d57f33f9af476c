#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "hyperyolo/error.hpp"

namespace hyperyolo {

enum class Scale { N, S, M, L };

// Per-scale architecture constants.
struct ScalePreset {
  Scale scale;
  std::array<std::size_t, 5> widths;        // B1..B5 channel counts
  std::size_t hyper_channels;               // HyperConv C_in = C_out
  double epsilon;                           // ball threshold
  std::array<std::size_t, 4> manet_depth;   // n for stages 2..5
  std::array<std::size_t, 4> manet_kernel;  // k for stages 2..5
};

inline constexpr std::array<ScalePreset, 4> kPresets = {{
    {Scale::N, {16, 32, 64, 128, 256}, 128, 6.0, {1, 2, 2, 1}, {3, 5, 5, 3}},
    {Scale::S, {32, 64, 128, 256, 512}, 256, 8.0, {1, 2, 2, 1}, {3, 5, 5, 3}},
    {Scale::M, {48, 96, 192, 384, 576}, 384, 10.0, {2, 4, 4, 2}, {3, 5, 5, 3}},
    {Scale::L, {64, 128, 256, 512, 512}, 512, 10.0, {3, 6, 6, 3}, {3, 5, 5, 3}},
}};

constexpr const ScalePreset& preset(Scale s) { return kPresets[static_cast<std::size_t>(s)]; }

constexpr std::string_view to_string(Scale s) {
  switch (s) {
    case Scale::N: return "N";
    case Scale::S: return "S";
    case Scale::M: return "M";
    case Scale::L: return "L";
  }
  return "?";
}

inline Scale parse_scale(std::string_view text) {
  if (text == "N" || text == "n") return Scale::N;
  if (text == "S" || text == "s") return Scale::S;
  if (text == "M" || text == "m") return Scale::M;
  if (text == "L" || text == "l") return Scale::L;
  detail::fail(ErrorKind::invalid_argument, "unknown scale '" + std::string(text) +
                                                "' (expected N, S, M or L)");
}

}  // namespace hyperyolo
