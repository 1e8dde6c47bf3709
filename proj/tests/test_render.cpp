#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "vcqc/camera/camera.hpp"
#include "vcqc/camera/frustum.hpp"
#include "vcqc/render/raster_io.hpp"
#include "vcqc/render/renderer.hpp"

using namespace vcqc;
using vcqc::test::Gen;

namespace {

std::vector<std::uint32_t> all_indices(const PointCloud& c) {
  std::vector<std::uint32_t> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0u);
  return idx;
}

// Random cloud in front of an identity camera, filling a 128x96 view.
PointCloud scene(Gen& g, std::size_t n) {
  std::vector<Vec3> pts;
  std::vector<double> s;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = g.uniform(0.5, 2.0);
    pts.emplace_back(g.uniform(-0.07, 0.07) * z, g.uniform(-0.05, 0.05) * z, z);
    s.push_back(g.uniform(0, 1));
  }
  return PointCloud(pts, ColorAttr::from_intensity(s));
}

const Intrinsics kSmall{4.0, 0.004, 128, 96, 64.0, 48.0};

}  // namespace

TEST(Colorize, Ramps) {
  const SplatConfig cfg{0, 0.01, HoleFill::None};
  const auto in = ColorAttr::from_intensity({1.0, 0.0, 0.5});
  EXPECT_EQ(colorize(in, 0, cfg), (Rgb8{255, 255, 255}));
  EXPECT_EQ(colorize(in, 1, cfg), (Rgb8{0, 0, 0}));
  EXPECT_EQ(colorize(in, 2, cfg), (Rgb8{128, 128, 128}));

  const auto sd = ColorAttr::from_signed_distance({0.0, 0.005, -0.01, 0.5, -0.5});
  EXPECT_EQ(colorize(sd, 0, cfg), (Rgb8{255, 255, 255}));
  const Rgb8 half = colorize(sd, 1, cfg);
  EXPECT_EQ(half.r, 255);
  EXPECT_LE(std::abs(int(half.g) - 128), 1);
  EXPECT_LE(std::abs(int(half.b) - 128), 1);
  EXPECT_EQ(colorize(sd, 2, cfg), (Rgb8{0, 0, 255}));
  EXPECT_EQ(colorize(sd, 3, cfg), (Rgb8{255, 0, 0}));
  EXPECT_EQ(colorize(sd, 4, cfg), (Rgb8{0, 0, 255}));

  const auto rgb = ColorAttr::from_rgb({{1, 2, 3}});
  EXPECT_EQ(colorize(rgb, 0, cfg), (Rgb8{1, 2, 3}));
}

TEST(Render, SinglePointOnAxis) {
  const PointCloud c(std::vector<Vec3>{Vec3(0, 0, 1)}, ColorAttr::from_rgb({{10, 20, 30}}));
  const auto buf = render(c, all_indices(c), Pose{}, kSmall, SplatConfig{0, 0.005, HoleFill::None});
  int filled = 0;
  for (int y = 0; y < buf.height(); ++y) {
    for (int x = 0; x < buf.width(); ++x) filled += !buf.empty_at(x, y);
  }
  EXPECT_EQ(filled, 1);
  EXPECT_EQ(buf.index_map.at(64, 48), 0u);
  EXPECT_EQ(buf.depth.at(64, 48), 1.0);
  EXPECT_EQ(buf.color.px(64, 48)[0], 10);
  EXPECT_EQ(buf.color.px(64, 48)[2], 30);

  const auto r2 = render(c, all_indices(c), Pose{}, kSmall, SplatConfig{2, 0.005, HoleFill::None});
  int covered = 0;
  for (auto v : r2.index_map.data) covered += v != kEmptyIndex;
  EXPECT_EQ(covered, 25);
}

TEST(Render, NearestPointWinsAndTiesGoToLowerIndex) {
  const PointCloud c = test::gray_cloud({Vec3(0, 0, 2), Vec3(0, 0, 1), Vec3(0, 0, 1)});
  const auto buf = render(c, all_indices(c), Pose{}, kSmall, SplatConfig{0, 0.005, HoleFill::None});
  EXPECT_EQ(buf.index_map.at(64, 48), 1u);
  EXPECT_EQ(buf.depth.at(64, 48), 1.0);
  const std::vector<std::uint32_t> only_far{0};
  EXPECT_EQ(render(c, only_far, Pose{}, kSmall, {0, 0.005, HoleFill::None}).index_map.at(64, 48), 0u);
}

TEST(Render, EmptySelectionGivesEmptyBuffer) {
  const PointCloud c = test::gray_cloud({Vec3(0, 0, 1)});
  const auto buf = render(c, {}, Pose{}, kSmall, SplatConfig{});
  for (auto v : buf.index_map.data) EXPECT_EQ(v, kEmptyIndex);
  for (double d : buf.depth.data) EXPECT_TRUE(std::isinf(d));
  const std::vector<std::uint32_t> bad{5};
  EXPECT_THROW(render(c, bad, Pose{}, kSmall, SplatConfig{}), InvalidArgument);
  EXPECT_THROW(render(c, {}, Pose{}, kSmall, SplatConfig{9, 0.005, HoleFill::None}), InvalidArgument);
}

TEST(Render, SoundnessAndOcclusion) {
  Gen g(31);
  for (int radius : {0, 1, 2}) {
    const PointCloud c = scene(g, 3000);
    const SplatConfig cfg{radius, 0.005, HoleFill::None};
    const auto buf = render(c, all_indices(c), Pose{}, kSmall, cfg);
    for (int y = 0; y < buf.height(); ++y) {
      for (int x = 0; x < buf.width(); ++x) {
        const std::uint32_t i = buf.index_map.at(x, y);
        EXPECT_EQ(i == kEmptyIndex, std::isinf(buf.depth.at(x, y)));
        if (i == kEmptyIndex) continue;
        const auto pr = project(Pose{}, kSmall, c.point(i));
        EXPECT_LE(std::abs(pixel_of(pr->u) - x), radius);
        EXPECT_LE(std::abs(pixel_of(pr->v) - y), radius);
        EXPECT_NEAR(pr->depth, buf.depth.at(x, y), 1e-9);
      }
    }
    for (std::uint32_t i = 0; i < c.size(); ++i) {
      const auto pr = project(Pose{}, kSmall, c.point(i));
      const long px = pixel_of(pr->u), py = pixel_of(pr->v);
      for (long y = py - radius; y <= py + radius; ++y) {
        for (long x = px - radius; x <= px + radius; ++x) {
          if (!buf.depth.in_bounds(x, y)) continue;
          EXPECT_FALSE(pr->depth < buf.depth.at(int(x), int(y)));
        }
      }
    }
  }
}

TEST(Render, ParallelMatchesSequential) {
  Gen g(32);
  const PointCloud c = scene(g, 20000);
  for (const SplatConfig cfg : {SplatConfig{0, 0.005, HoleFill::None}, SplatConfig{2, 0.005, HoleFill::Close3}}) {
    const auto a = render(c, all_indices(c), Pose{}, kSmall, cfg, 1);
    for (int t : {2, 3, 7}) {
      const auto b = render(c, all_indices(c), Pose{}, kSmall, cfg, t);
      EXPECT_TRUE(a.index_map == b.index_map);
      EXPECT_TRUE(a.depth == b.depth);
      EXPECT_TRUE(a.color == b.color);
    }
  }
}

TEST(Render, NoHoleFillNeverInventsIndices) {
  Gen g(33);
  const PointCloud c = scene(g, 500);
  std::vector<std::uint32_t> subset;
  for (std::uint32_t i = 0; i < c.size(); i += 2) subset.push_back(i);
  const auto buf = render(c, subset, Pose{}, kSmall, SplatConfig{1, 0.005, HoleFill::None});
  for (auto v : buf.index_map.data) {
    if (v != kEmptyIndex) EXPECT_EQ(v % 2, 0u);
  }
}

TEST(Render, Close3FillsIsolatedHoleFromNeighbours) {
  std::vector<Vec3> pts;
  const double f = kSmall.focal_px();
  for (int y = 40; y < 50; ++y) {
    for (int x = 60; x < 70; ++x) {
      if (x == 65 && y == 45) continue;
      pts.emplace_back((x + 0.5 - kSmall.cx) / f, (y + 0.5 - kSmall.cy) / f, 1.0);
    }
  }
  const PointCloud c = test::gray_cloud(pts);
  const auto open = render(c, all_indices(c), Pose{}, kSmall, SplatConfig{0, 0.005, HoleFill::None});
  EXPECT_TRUE(open.empty_at(65, 45));
  const auto closed = render(c, all_indices(c), Pose{}, kSmall, SplatConfig{0, 0.005, HoleFill::Close3});
  EXPECT_FALSE(closed.empty_at(65, 45));
  EXPECT_TRUE(closed.empty_at(10, 10));
}

TEST(RasterIo, RoundTripsAndRejectsCorruptData) {
  Gen g(34);
  Raster<std::uint32_t> idx(37, 19);
  Raster<double> dep(37, 19);
  for (auto& v : idx.data) v = g.coin(0.3) ? kEmptyIndex : g.integer(0, 1 << 30);
  for (auto& v : dep.data) v = g.coin(0.3) ? INFINITY : double(float(g.uniform(0, 5)));
  const auto dir = test::scratch_dir("raster_io");
  write_index_raster(dir / "a.vcidx", idx);
  write_depth_raster(dir / "a.vcdpt", dep);
  EXPECT_TRUE(read_index_raster(dir / "a.vcidx") == idx);
  EXPECT_TRUE(read_depth_raster(dir / "a.vcdpt") == dep);
  EXPECT_THROW(read_index_raster(dir / "a.vcdpt"), DataError);
  std::string bytes = encode_index_raster(idx);
  bytes.pop_back();
  EXPECT_THROW((detail::decode_raster<std::uint32_t, std::uint32_t>(kIndexMagic, bytes, "cut")), DataError);
  EXPECT_THROW(read_index_raster(dir / "missing.vcidx"), DataError);
}

TEST(RasterIo, PngRoundTrip) {
  Gen g(35);
  RgbImage img(53, 29);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(g.integer(0, 255));
  const auto dir = test::scratch_dir("png");
  write_png(dir / "a.png", img);
  EXPECT_TRUE(read_png(dir / "a.png") == img);
  write_file(dir / "bad.png", "not a png");
  EXPECT_THROW(read_png(dir / "bad.png"), DataError);
}

TEST(RasterIo, CropsKeepContent) {
  RgbImage img(10, 8);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(i);
  const RgbImage c = img.crop(3, 2, 4, 5);
  EXPECT_EQ(c.px(0, 0)[0], img.px(3, 2)[0]);
  EXPECT_EQ(c.px(3, 4)[2], img.px(6, 6)[2]);
  EXPECT_THROW(img.crop(8, 0, 4, 1), InvalidArgument);
}
