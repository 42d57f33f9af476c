#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "hyperyolo/hyt1.hpp"
#include "hyperyolo/image.hpp"
#include "hyperyolo/random.hpp"

using namespace hyperyolo;

namespace {

std::string bytes_of(std::initializer_list<int> xs) {
  std::string s;
  for (int x : xs) s.push_back(static_cast<char>(x));
  return s;
}

}  // namespace

TEST(Hyt1, ByteLayout) {
  std::ostringstream os;
  const std::uint32_t dims[2] = {2, 1};
  const float data[2] = {1.0f, -2.0f};
  hyt1::write(os, dims, data);
  std::string expect = bytes_of({'H', 'Y', 'T', '1', 0, 2, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0});
  expect += bytes_of({0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0});
  EXPECT_EQ(os.str(), expect);
}

TEST(Hyt1, RoundTripIsBitwiseForRanksOneToFour) {
  Rng rng(1);
  for (std::size_t rank = 1; rank <= 4; ++rank) {
    hyt1::RawTensor t;
    for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(static_cast<std::uint32_t>(1 + rng.below(5)));
    t.data.resize(t.element_count());
    for (auto& f : t.data) f = static_cast<float>(rng.uniform(-1e3, 1e3));
    t.data[0] = -0.0f;
    if (t.data.size() > 1) t.data[1] = std::bit_cast<float>(0x00000001u);
    std::stringstream ss;
    hyt1::write(ss, t.dims, t.data);
    const auto back = hyt1::read(ss);
    ASSERT_EQ(back.dims, t.dims);
    for (std::size_t i = 0; i < t.data.size(); ++i)
      EXPECT_EQ(std::bit_cast<std::uint32_t>(back.data[i]), std::bit_cast<std::uint32_t>(t.data[i]));
  }
}

TEST(Hyt1, RejectsBadMagicAndTruncation) {
  std::istringstream bad(bytes_of({'H', 'Y', 'T', '2', 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_THROW(hyt1::read(bad), Error);
  std::istringstream shortfile(bytes_of({'H', 'Y', 'T', '1', 0, 1, 0, 0, 2, 0, 0, 0, 0, 0}));
  EXPECT_THROW(hyt1::read(shortfile), Error);
  std::istringstream dtype(bytes_of({'H', 'Y', 'T', '1', 3, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_THROW(hyt1::read(dtype), Error);
}

TEST(Hyt1, TensorAndMatrixFilesRoundTrip) {
  Rng rng(2);
  const auto dir = std::filesystem::temp_directory_path();
  auto x = random_tensor<float>(rng, 2, 3, 4, 5);
  hyt1::save_tensor(dir / "hyperyolo_io_t.hyt", x);
  EXPECT_EQ(hyt1::to_tensor_map(hyt1::load(dir / "hyperyolo_io_t.hyt")), x);
  auto m = random_features<float>(rng, 7, 3);
  hyt1::save_matrix(dir / "hyperyolo_io_m.hyt", m);
  auto back = hyt1::to_feature_matrix(hyt1::load(dir / "hyperyolo_io_m.hyt"));
  EXPECT_TRUE(std::equal(back.data().begin(), back.data().end(), m.data().begin()));
  EXPECT_THROW(hyt1::to_tensor_map(hyt1::load(dir / "hyperyolo_io_m.hyt")), Error);
  EXPECT_THROW(hyt1::load(dir / "hyperyolo_io_missing.hyt"), Error);
}

TEST(Pnm, GrayscaleReplicatesIntoThreeChannels) {
  std::istringstream is("P5\n2 2\n255\n" + bytes_of({0, 255, 0, 255}));
  auto t = read_pgm_ppm(is);
  ASSERT_EQ(t.shape_string(), "1x3x2x2");
  for (std::size_t c = 0; c < 3; ++c) {
    const float expect[4] = {0, 1, 0, 1};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(t.channel(0, c)[i], expect[i]);
  }
}

TEST(Pnm, ColorAndComments) {
  std::istringstream is("P6\n# one pixel\n1 1\n255\n" + bytes_of({255, 0, 0}));
  auto t = read_pgm_ppm(is);
  EXPECT_EQ(t.at(0, 0, 0, 0), 1.0f);
  EXPECT_EQ(t.at(0, 1, 0, 0), 0.0f);
  EXPECT_EQ(t.at(0, 2, 0, 0), 0.0f);
}

TEST(Pnm, RejectsBadHeaders) {
  std::istringstream ascii("P2\n1 1\n255\n0\n");
  EXPECT_THROW(read_pgm_ppm(ascii), Error);
  std::istringstream deep("P5\n1 1\n65535\n" + bytes_of({0, 0}));
  EXPECT_THROW(read_pgm_ppm(deep), Error);
  std::istringstream trunc("P5\n2 2\n255\n" + bytes_of({1}));
  EXPECT_THROW(read_pgm_ppm(trunc), Error);
}

TEST(Heatmap, ConstantMapIsAllZeros) {
  TensorMap<float> x(1, 4, 3, 3, std::vector<float>(36, 2.5f));
  for (auto p : heatmap_pixels(x)) EXPECT_EQ(p, 0);
}

TEST(Heatmap, TwoLevelMapIsZeroAnd255) {
  TensorMap<float> x(1, 1, 1, 4, {-3.0f, 7.0f, 7.0f, -3.0f});
  EXPECT_EQ(heatmap_pixels(x), (std::vector<std::uint8_t>{0, 255, 255, 0}));
}

TEST(Heatmap, WrittenPgmReadsBackAsQuantizedMean) {
  TensorMap<float> x(1, 2, 2, 2, {0, 1, 2, 3, 0, 1, 2, 3});
  const auto path = std::filesystem::temp_directory_path() / "hyperyolo_io_heat.pgm";
  export_heatmap(x, path);
  auto back = load_pgm_ppm(path);
  const float expect[4] = {0.0f, 85.0f / 255, 170.0f / 255, 1.0f};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(back.channel(0, 0)[i], expect[i]);
}
