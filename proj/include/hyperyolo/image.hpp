#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hyperyolo/error.hpp"
#include "hyperyolo/tensor.hpp"

namespace hyperyolo {

namespace detail {

inline std::size_t read_pnm_number(std::istream& is) {
  int ch = is.peek();
  while (ch != EOF) {
    if (ch == '#') {
      std::string skip;
      std::getline(is, skip);
    } else if (std::isspace(ch)) {
      is.get();
    } else {
      break;
    }
    ch = is.peek();
  }
  std::size_t value = 0;
  bool any = false;
  while (is.peek() != EOF && std::isdigit(is.peek())) {
    value = value * 10 + static_cast<std::size_t>(is.get() - '0');
    any = true;
    require(value < (1u << 24), ErrorKind::format, "PNM: header value too large");
  }
  require(any, ErrorKind::format, "PNM: malformed header");
  return value;
}

}  // namespace detail

// Binary P5/P6 with maxval <= 255. Values are scaled to [0, 1]; grayscale is
// replicated into three channels.
inline TensorMap<float> read_pgm_ppm(std::istream& is) {
  char magic[2] = {0, 0};
  if (!is.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    detail::fail(ErrorKind::format, "PNM: expected binary P5 or P6 magic");
  const bool color = magic[1] == '6';
  const std::size_t width = detail::read_pnm_number(is);
  const std::size_t height = detail::read_pnm_number(is);
  const std::size_t maxval = detail::read_pnm_number(is);
  detail::require(width >= 1 && height >= 1, ErrorKind::format, "PNM: zero image size");
  detail::require(maxval >= 1 && maxval <= 255, ErrorKind::format,
                  "PNM: unsupported maxval " + std::to_string(maxval) + " (8-bit only)");
  const int sep = is.get();
  detail::require(sep != EOF && std::isspace(sep), ErrorKind::format,
                  "PNM: missing whitespace after header");
  const std::size_t channels = color ? 3 : 1;
  std::vector<unsigned char> raster(width * height * channels);
  if (!is.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size())))
    detail::fail(ErrorKind::format, "PNM: truncated raster");

  TensorMap<float> out(1, 3, height, width);
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t p = 0; p < width * height; ++p)
    for (std::size_t c = 0; c < 3; ++c) {
      const unsigned char byte = raster[p * channels + (color ? c : 0)];
      out.channel(0, c)[p] = static_cast<float>(byte) * scale;
    }
  return out;
}

inline TensorMap<float> load_pgm_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  detail::require(static_cast<bool>(is), ErrorKind::io, "cannot open image " + path.string());
  return read_pgm_ppm(is);
}

inline void write_pgm(std::ostream& os, std::size_t width, std::size_t height,
                      const std::vector<std::uint8_t>& pixels) {
  os << "P5\n" << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
}

// Per-pixel channel mean, min-max normalized to 0..255. A constant map is
// written as all zeros.
template <typename T>
std::vector<std::uint8_t> heatmap_pixels(const TensorMap<T>& x) {
  detail::require(x.batch() == 1, ErrorKind::invalid_argument,
                  "heatmap: expects a single-image map");
  const std::size_t plane = x.plane();
  std::vector<double> mean(plane, 0.0);
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto ch = x.channel(0, c);
    for (std::size_t p = 0; p < plane; ++p) mean[p] += static_cast<double>(ch[p]);
  }
  for (auto& m : mean) m /= static_cast<double>(x.channels());
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<std::uint8_t> pixels(plane, 0);
  if (range > 0.0)
    for (std::size_t p = 0; p < plane; ++p)
      pixels[p] = static_cast<std::uint8_t>(
          std::clamp(std::lround((mean[p] - min) / range * 255.0), 0L, 255L));
  return pixels;
}

template <typename T>
void export_heatmap(const TensorMap<T>& x, const std::filesystem::path& path) {
  const auto pixels = heatmap_pixels(x);
  std::ofstream os(path, std::ios::binary);
  detail::require(static_cast<bool>(os), ErrorKind::io, "cannot write heatmap " + path.string());
  write_pgm(os, x.width(), x.height(), pixels);
  detail::require(static_cast<bool>(os), ErrorKind::io, "write failed for " + path.string());
}

}  // namespace hyperyolo
