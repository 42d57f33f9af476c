#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "hyperyolo/neck.hpp"
#include "hyperyolo/numeric.hpp"
#include "hyperyolo/random.hpp"
#include "hyperyolo/weights_io.hpp"

using namespace hyperyolo;

namespace {

NeckConfig small_config() {
  NeckConfig cfg;
  cfg.widths = {4, 6, 8, 10, 12};
  cfg.hyper_channels = 8;
  cfg.epsilon = 2.5;
  return cfg;
}

}  // namespace

TEST(NeckPresets, TableValues) {
  const double eps[] = {6, 8, 10, 10};
  const std::size_t hc[] = {128, 256, 384, 512};
  int i = 0;
  for (auto s : {Scale::N, Scale::S, Scale::M, Scale::L}) {
    auto cfg = NeckConfig::from_preset(s);
    EXPECT_EQ(cfg.epsilon, eps[i]);
    EXPECT_EQ(cfg.hyper_channels, hc[i]);
    EXPECT_EQ(cfg.target_stride, 16u);
    ++i;
  }
}

TEST(Collect, ScaleSAt640) {
  auto cfg = NeckConfig::from_preset(Scale::S);
  EXPECT_EQ(cfg.collected_channels(), 992u);
  Rng rng(1);
  auto w = random_neck<float>(cfg, 2);
  EXPECT_EQ(w.fuse.in_channels, 992u);
  auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 640, 640);
  auto m = semantic_collect(pyr, cfg, w);
  EXPECT_EQ(m.vertices(), 1600u);
  EXPECT_EQ(m.channels(), 256u);
  ASSERT_TRUE(m.grid_meta().has_value());
  EXPECT_EQ(m.grid_meta()->height, 40u);
}

TEST(Collect, SingleLevelAtTargetStrideIsNotResampled) {
  auto cfg = small_config();
  cfg.collecting_set = {false, false, false, true, false};
  Rng rng(3);
  auto w = random_neck<float>(cfg, 4);
  EXPECT_EQ(w.fuse.in_channels, 10u);
  auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
  EXPECT_EQ(semantic_collect(pyr, cfg, w), to_vertices(conv2d_block(pyr[3], w.fuse)));
}

TEST(Collect, CollectingSetOnlyChangesFuseWidth) {
  auto cfg = NeckConfig::from_preset(Scale::S);
  cfg.collecting_set = {false, false, true, true, true};
  // 128 + 256 + 512.
  EXPECT_EQ(cfg.collected_channels(), 896u);
  EXPECT_EQ(random_neck<float>(cfg, 1).fuse.in_channels, 896u);
  auto small = small_config();
  Rng rng(5);
  auto pyr = random_pyramid<float>(rng, small.widths, 1, 64, 64);
  auto a_cfg = small, b_cfg = small;
  b_cfg.collecting_set = {false, false, true, true, true};
  auto a = hyperc2net(pyr, a_cfg, random_neck<float>(a_cfg, 6));
  auto b = hyperc2net(pyr, b_cfg, random_neck<float>(b_cfg, 6));
  EXPECT_EQ(a.n3.shape_string(), b.n3.shape_string());
  EXPECT_EQ(a.n4.shape_string(), b.n4.shape_string());
  EXPECT_EQ(a.n5.shape_string(), b.n5.shape_string());
}

TEST(Collect, UnreachableGridFails) {
  auto cfg = small_config();
  cfg.target_stride = 12;
  Rng rng(6);
  auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 96, 96);
  EXPECT_THROW(semantic_collect(pyr, cfg, random_neck<float>(cfg, 1)), Error);
}

TEST(Compute, ModeNoneIsBitwiseIdentity) {
  auto cfg = small_config();
  cfg.mode = CorrelationMode::none;
  Rng rng(7);
  auto x = random_features<float>(rng, 16, 8);
  x.set_grid_meta(GridMeta{4, 4, 1});
  EXPECT_EQ(hypergraph_compute(x, cfg, random_neck<float>(cfg, 1)), x);
}

TEST(Compute, HighOrderIsHyperconvOnTheBall) {
  auto cfg = small_config();
  Rng rng(8);
  auto w = random_neck<float>(cfg, 2);
  auto x = random_features<float>(rng, 16, 8);
  x.set_grid_meta(GridMeta{4, 4, 1});
  std::vector<Hypergraph> built;
  auto y = hypergraph_compute(x, cfg, w, &built);
  ASSERT_EQ(built.size(), 1u);
  EXPECT_EQ(built[0], build_epsilon_ball_hypergraph(x, EpsilonBallParams{cfg.epsilon}));
  auto expect = hyperconv(x, built[0], w.theta);
  EXPECT_EQ(max_rel_diff(y, expect), 0.0);
  cfg.mode = CorrelationMode::low_order;
  auto low = hypergraph_compute(x, cfg, w);
  EXPECT_EQ(max_rel_diff(low, graphconv_low_order(x, EpsilonBallParams{cfg.epsilon}, w.theta)), 0.0);
  EXPECT_THROW(hypergraph_compute(random_features<float>(rng, 16, 7), cfg, w), Error);
}

TEST(Compute, PoolingModesCoincideAtBatchOne) {
  auto cfg = small_config();
  Rng rng(9);
  auto w = random_neck<float>(cfg, 3);
  auto x = random_features<float>(rng, 16, 8);
  x.set_grid_meta(GridMeta{4, 4, 1});
  auto a = hypergraph_compute(x, cfg, w);
  cfg.pooling = Pooling::cross_batch;
  EXPECT_EQ(a, hypergraph_compute(x, cfg, w));
}

TEST(Compute, PerImageBuildsOneStructurePerImage) {
  auto cfg = small_config();
  cfg.epsilon = 100.0;
  Rng rng(10);
  auto w = random_neck<float>(cfg, 3);
  auto x = random_features<float>(rng, 32, 8);
  x.set_grid_meta(GridMeta{4, 4, 2});
  std::vector<Hypergraph> per, cross;
  hypergraph_compute(x, cfg, w, &per);
  cfg.pooling = Pooling::cross_batch;
  hypergraph_compute(x, cfg, w, &cross);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_EQ(per[0].vertex_count(), 16u);
  EXPECT_EQ(per[0].hyperedge(0).size(), 16u);
  ASSERT_EQ(cross.size(), 1u);
  EXPECT_EQ(cross[0].hyperedge(0).size(), 32u);
}

TEST(Scatter, ShapesAt640ScaleS) {
  auto cfg = NeckConfig::from_preset(Scale::S);
  Rng rng(11);
  auto w = random_neck<float>(cfg, 1);
  auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 640, 640);
  auto hyper = random_features<float>(rng, 1600, 256);
  hyper.set_grid_meta(GridMeta{40, 40, 1});
  auto s = semantic_scatter(hyper, pyr, cfg, w);
  EXPECT_EQ(s[0].shape_string(), "1x128x80x80");
  EXPECT_EQ(s[1].shape_string(), "1x256x40x40");
  EXPECT_EQ(s[2].shape_string(), "1x512x20x20");
  EXPECT_THROW(semantic_scatter(random_features<float>(rng, 1600, 256), pyr, cfg, w), Error);
}

TEST(Scatter, ZeroHyperHalfReproducesB) {
  auto cfg = small_config();
  Rng rng(12);
  auto w = random_neck<float>(cfg, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t wb = cfg.widths[2 + i], in = cfg.hyper_channels + wb;
    w.scatter[i] = zero_conv<float>(in, wb, 1, 1, 1, Activation::none);
    for (std::size_t o = 0; o < wb; ++o) w.scatter[i].weights[o * in + cfg.hyper_channels + o] = 1.0f;
  }
  auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
  FeatureMatrix<float> zero(16, 8);
  zero.set_grid_meta(GridMeta{4, 4, 1});
  auto s = semantic_scatter(zero, pyr, cfg, w);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s[i], pyr[2 + i]);
}

TEST(BottomUp, ZeroInZeroOutAndContract) {
  auto cfg = small_config();
  auto w = random_neck<float>(cfg, 1);
  for (auto* p : {&w.down[0], &w.down[1], &w.merge[0], &w.merge[1]})
    std::fill(p->bias.begin(), p->bias.end(), 0.0f);
  auto n = bottom_up(TensorMap<float>(1, 8, 8, 8), TensorMap<float>(1, 10, 4, 4),
                     TensorMap<float>(1, 12, 2, 2), w);
  for (auto* t : {&n.n3, &n.n4, &n.n5})
    for (float v : t->data()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(n.n4.shape_string(), "1x10x4x4");
  EXPECT_EQ(n.n5.shape_string(), "1x12x2x2");
  EXPECT_THROW(bottom_up(TensorMap<float>(1, 8, 8, 8), TensorMap<float>(1, 10, 8, 8),
                         TensorMap<float>(1, 12, 2, 2), w),
               Error);
}

TEST(BottomUp, PerturbingS3ReachesN5) {
  auto cfg = small_config();
  Rng rng(13);
  auto w = random_neck<float>(cfg, 2);
  auto s3 = random_tensor<float>(rng, 1, 8, 8, 8);
  auto s4 = random_tensor<float>(rng, 1, 10, 4, 4);
  auto s5 = random_tensor<float>(rng, 1, 12, 2, 2);
  auto a = bottom_up(s3, s4, s5, w);
  s3.at(0, 3, 5, 5) += 1.0f;
  auto b = bottom_up(s3, s4, s5, w);
  EXPECT_NE(a.n5, b.n5);
}

TEST(HyperC2Net, ShapeLawAt256ForEveryPreset) {
  Rng rng(14);
  for (auto s : {Scale::N, Scale::S, Scale::M, Scale::L}) {
    auto cfg = NeckConfig::from_preset(s);
    auto pyr = random_pyramid<float>(rng, cfg.widths, 1, 256, 256);
    auto out = hyperc2net(pyr, cfg, random_neck<float>(cfg, 5));
    const auto& wd = cfg.widths;
    EXPECT_EQ(out.n3.shape_string(), "1x" + std::to_string(wd[2]) + "x32x32");
    EXPECT_EQ(out.n4.shape_string(), "1x" + std::to_string(wd[3]) + "x16x16");
    EXPECT_EQ(out.n5.shape_string(), "1x" + std::to_string(wd[4]) + "x8x8");
  }
}

TEST(HyperC2Net, ModeNoneEqualsPropagationFreePipeline) {
  auto cfg = small_config();
  cfg.mode = CorrelationMode::none;
  Rng rng(15);
  auto w = random_neck<float>(cfg, 1);
  auto pyr = random_pyramid<float>(rng, cfg.widths, 2, 64, 96);
  auto s = semantic_scatter(semantic_collect(pyr, cfg, w), pyr, cfg, w);
  EXPECT_EQ(hyperc2net(pyr, cfg, w), bottom_up(s[0], s[1], s[2], w));
}

TEST(HyperC2Net, BatchIndependencePerImage) {
  auto cfg = small_config();
  Rng rng(16);
  auto w = random_neck<float>(cfg, 1);
  auto a = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
  auto b = random_pyramid<float>(rng, cfg.widths, 1, 64, 64);
  FeaturePyramid<float> both;
  for (std::size_t l = 0; l < 5; ++l) {
    std::vector<float> d(a[l].data().begin(), a[l].data().end());
    d.insert(d.end(), b[l].data().begin(), b[l].data().end());
    both[l] = TensorMap<float>(2, a[l].channels(), a[l].height(), a[l].width(), d);
  }
  auto j = hyperc2net(both, cfg, w);
  auto oa = hyperc2net(a, cfg, w), ob = hyperc2net(b, cfg, w);
  std::vector<float> stacked(oa.n5.data().begin(), oa.n5.data().end());
  stacked.insert(stacked.end(), ob.n5.data().begin(), ob.n5.data().end());
  EXPECT_LE((max_rel_diff<float, float>(j.n5.data(), stacked)), 1e-6);
}

TEST(Config, ParsesKeyValues) {
  std::istringstream is(
      "# neck settings\nmode = low_order\nepsilon=3.5\nscale=N\ncollecting_set=B3,4,B5\n"
      "pooling=cross_batch\ntarget_stride=8\n");
  auto cfg = parse_neck_config(is);
  EXPECT_EQ(cfg.scale, Scale::N);
  EXPECT_EQ(cfg.mode, CorrelationMode::low_order);
  EXPECT_EQ(cfg.epsilon, 3.5);
  EXPECT_EQ(cfg.hyper_channels, 128u);
  EXPECT_EQ(cfg.pooling, Pooling::cross_batch);
  EXPECT_EQ(cfg.target_stride, 8u);
  EXPECT_EQ(cfg.collecting_set_string(), "B3,B4,B5");
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {"colour=red\n", "epsilon=abc\n", "epsilon=-1\n", "mode=quantum\n",
                           "collecting_set=B7\n", "scale=XL\n", "no equals sign\n"}) {
    std::istringstream is(text);
    EXPECT_THROW(parse_neck_config(is), Error) << text;
  }
  EXPECT_THROW(load_neck_config("/nonexistent/neck.cfg"), Error);
}

TEST(Weights, SaveLoadRoundTrip) {
  auto cfg = small_config();
  auto a = random_neck<float>(cfg, 1);
  auto b = random_neck<float>(cfg, 2);
  const auto dir = std::filesystem::temp_directory_path() / "hyperyolo_neck_weights_test";
  std::filesystem::remove_all(dir);
  save_weights(dir, weight_entries(a));
  load_weights(dir, weight_entries(b));
  EXPECT_EQ(b.theta, a.theta);
  EXPECT_EQ(b.fuse.weights, a.fuse.weights);
  EXPECT_EQ(b.merge[1].bias, a.merge[1].bias);
  auto other = cfg;
  other.hyper_channels = 4;
  auto c = random_neck<float>(other, 3);
  EXPECT_THROW(load_weights(dir, weight_entries(c)), Error);
  std::filesystem::remove_all(dir);
}
