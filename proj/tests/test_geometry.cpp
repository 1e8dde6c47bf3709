#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/geometry/plane_fit.hpp"
#include "vcqc/geometry/point_cloud.hpp"

using namespace vcqc;
using vcqc::test::Gen;

namespace {

LoadedCloud parse(const std::string& text, const std::string& name = "mem.ply") {
  return text.rfind("ply", 0) == 0 ? detail::parse_ply(text, name, CloudFormat::Auto) : detail::parse_xyz(text, name);
}

double rms_residual(const std::vector<Vec3>& pts, const Plane& p) {
  double s = 0.0;
  for (const auto& q : pts) s += p.signed_distance(q) * p.signed_distance(q);
  return std::sqrt(s / pts.size());
}

}  // namespace

TEST(PointCloud, RejectsInvalidConstruction) {
  EXPECT_THROW(PointCloud({Vec3(0, 0, 0)}, ColorAttr::from_intensity({})), InvalidArgument);
  EXPECT_THROW(PointCloud({Vec3(std::nan(""), 0, 0)}, ColorAttr::from_intensity({0.5})), InvalidArgument);
  EXPECT_THROW(PointCloud({Vec3(0, 0, 0)}, ColorAttr::from_intensity({1.5})), InvalidArgument);
  EXPECT_THROW(PointCloud({Vec3(0, 0, 0)}, ColorAttr::from_signed_distance({INFINITY})), InvalidArgument);
  EXPECT_NO_THROW(PointCloud({Vec3(0, 0, 0)}, ColorAttr::from_signed_distance({-3.0})));
}

TEST(Aabb, UnitCubeCornersAndSinglePoint) {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const AABB box = compute_aabb(test::gray_cloud(corners));
  EXPECT_EQ(box.min, Vec3(0, 0, 0));
  EXPECT_EQ(box.max, Vec3(1, 1, 1));
  EXPECT_EQ(compute_centroid(test::gray_cloud(corners)), Vec3(0.5, 0.5, 0.5));

  const Vec3 p(0.25, -3.0, 7.5);
  const AABB one = compute_aabb(test::gray_cloud({p}));
  EXPECT_EQ(one.min, p);
  EXPECT_EQ(one.max, p);
  EXPECT_THROW(compute_aabb(PointCloud{}), InvalidArgument);
  EXPECT_THROW(compute_centroid(PointCloud{}), InvalidArgument);
}

TEST(Aabb, MatchesExhaustiveScanOnRandomClouds) {
  Gen g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud c = g.intensity_cloud(1000, -50.0, 50.0);
    const AABB box = compute_aabb(c);
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto& p : c.points()) {
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }
    EXPECT_EQ(box.min, lo);
    EXPECT_EQ(box.max, hi);
    for (const auto& p : c.points()) EXPECT_TRUE(box.contains(p));
  }
}

TEST(Centroid, TwoPointsAndSummationOracle) {
  EXPECT_EQ(compute_centroid(test::gray_cloud({Vec3(0, 0, 0), Vec3(2, 0, 0)})), Vec3(1, 0, 0));
  Gen g(12);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud c = g.intensity_cloud(2000, -10.0, 30.0);
    long double s[3] = {0, 0, 0};
    for (const auto& p : c.points()) {
      for (int k = 0; k < 3; ++k) s[k] += p[k];
    }
    const Vec3 m = compute_centroid(c);
    for (int k = 0; k < 3; ++k) {
      const double oracle = static_cast<double>(s[k] / c.size());
      EXPECT_NEAR(m[k], oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST(PlaneFit, ExactPlanes) {
  std::vector<Vec3> flat;
  Gen g(13);
  for (int i = 0; i < 50; ++i) flat.emplace_back(g.uniform(-1, 1), g.uniform(-1, 1), 0.0);
  const Plane p = fit_plane(test::gray_cloud(flat), LeastSquaresFit{});
  EXPECT_NEAR(std::abs(p.normal.z()), 1.0, 1e-12);
  EXPECT_NEAR(p.offset, 0.0, 1e-12);

  std::vector<Vec3> tilted;
  for (int i = 0; i < 50; ++i) {
    const double x = g.uniform(-1, 1), y = g.uniform(-1, 1);
    tilted.emplace_back(x, y, 1.0 - x - y);
  }
  const Plane t = fit_plane(test::gray_cloud(tilted), LeastSquaresFit{});
  const Vec3 expect = Vec3(1, 1, 1).normalized();
  EXPECT_NEAR(std::abs(t.normal.dot(expect)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(t.offset), 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(t.valid());
}

TEST(PlaneFit, RejectsDegenerateInput) {
  EXPECT_THROW(fit_plane(test::gray_cloud({Vec3(0, 0, 0), Vec3(1, 0, 0)}), LeastSquaresFit{}), InvalidArgument);
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(i, 2 * i, -i);
  EXPECT_THROW(fit_plane(test::gray_cloud(line), LeastSquaresFit{}), InvalidArgument);
  EXPECT_THROW(fit_plane(test::gray_cloud(line), RansacFit{}), InvalidArgument);
}

TEST(PlaneFit, RansacIgnoresOutliers) {
  Gen g(14);
  std::vector<Vec3> pts;
  for (int i = 0; i < 950; ++i) pts.emplace_back(g.uniform(-1, 1), g.uniform(-1, 1), 0.0);
  for (int i = 0; i < 50; ++i) pts.emplace_back(g.uniform(-1, 1), g.uniform(-1, 1), 1.0);
  const Plane p = fit_plane(test::gray_cloud(pts), RansacFit{500, 0.001, 7});
  EXPECT_NEAR(std::abs(p.normal.z()), 1.0, 1e-6);
  EXPECT_NEAR(p.offset, 0.0, 1e-6);
}

TEST(PlaneFit, LeastSquaresIsLocallyOptimal) {
  Gen g(15);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) {
    const double x = g.uniform(-1, 1), y = g.uniform(-1, 1);
    pts.emplace_back(x, y, 0.3 * x - 0.2 * y + 0.5 + g.normal(0.01));
  }
  const Plane best = fit_plane(test::gray_cloud(pts), LeastSquaresFit{});
  const double r0 = rms_residual(pts, best);
  for (int k = 0; k < 100; ++k) {
    const Vec3 n = (best.normal + Vec3(g.normal(0.01), g.normal(0.01), g.normal(0.01))).normalized();
    const Plane q{n, best.offset + g.normal(0.01)};
    EXPECT_LE(r0, rms_residual(pts, q) + 1e-15);
  }
}

TEST(SignedDistance, MatchesDotProductOracle) {
  const Plane z0{Vec3(0, 0, 1), 0.0};
  const PointCloud c = test::gray_cloud({Vec3(3, 4, 0), Vec3(0, 0, 0.01)});
  const PointCloud s = signed_distance_colorize(c, z0);
  EXPECT_EQ(s.colors().kind, ColorKind::SignedDistance);
  EXPECT_EQ(s.colors().scalar[0], 0.0);
  EXPECT_EQ(s.colors().scalar[1], 0.01);

  Gen g(16);
  const PointCloud r = g.intensity_cloud(500, -2, 2);
  const Plane p{Vec3(1, -2, 0.5).normalized(), 0.3};
  const PointCloud rs = signed_distance_colorize(r, p);
  ASSERT_EQ(rs.size(), r.size());
  EXPECT_EQ(rs.points(), r.points());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(rs.colors().scalar[i], p.normal.dot(r.point(i)) - p.offset);
  EXPECT_THROW(signed_distance_colorize(r, Plane{Vec3(0, 0, 2), 0.0}), InvalidArgument);
}

TEST(VoxelSubsample, MergesWithinVoxelAndKeepsSeparatedPoints) {
  const auto same = voxel_subsample(test::gray_cloud({Vec3(0.001, 0.001, 0.001), Vec3(0.003, 0.005, 0.007)}), 0.01);
  ASSERT_EQ(same.cloud.size(), 1u);
  EXPECT_TRUE(same.cloud.point(0).isApprox(Vec3(0.002, 0.003, 0.004)));
  EXPECT_EQ(same.sources[0], (std::vector<std::uint32_t>{0, 1}));

  const auto apart = voxel_subsample(test::gray_cloud({Vec3(0.005, 0, 0), Vec3(0.035, 0, 0), Vec3(0.065, 0, 0)}), 0.01);
  EXPECT_EQ(apart.cloud.size(), 3u);
  EXPECT_THROW(voxel_subsample(test::gray_cloud({Vec3(0, 0, 0)}), 0.0), InvalidArgument);
}

TEST(VoxelSubsample, EightPointGridIntoFourBins) {
  // Points at x in {0.5, 1.5, 2.5, 3.5}, y in {0.5, 1.5}; voxel 2 pairs them along x.
  std::vector<Vec3> pts;
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) pts.emplace_back(x + 0.5, y * 2 + 0.5, 0.5);
  }
  const auto v = voxel_subsample(test::gray_cloud(pts), 2.0);
  ASSERT_EQ(v.cloud.size(), 4u);
  const std::vector<Vec3> expect = {Vec3(1, 0.5, 0.5), Vec3(3, 0.5, 0.5), Vec3(1, 2.5, 0.5), Vec3(3, 2.5, 0.5)};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(v.cloud.point(i).isApprox(expect[i])) << i;
}

TEST(CloudIo, AsciiPlyWithRgb) {
  const std::string text =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
      "0 0 0 255 0 0\n1 0 0 0 255 0\n0 1 0 0 0 255\n";
  const auto c = parse(text).cloud;
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.colors().kind, ColorKind::Rgb8);
  EXPECT_EQ(c.colors().rgb[1], (Rgb8{0, 255, 0}));
  EXPECT_EQ(c.point(2), Vec3(0, 1, 0));
}

TEST(CloudIo, XyzScalarIsMinMaxNormalized) {
  const auto c = parse("# header\n0 0 0 10\n1 0 0 20\n2 0 0 30\n", "a.xyz").cloud;
  EXPECT_EQ(c.colors().kind, ColorKind::Intensity);
  EXPECT_EQ(c.colors().scalar, (std::vector<double>{0.0, 0.5, 1.0}));
  const auto flat = parse("0 0 0 7\n1 0 0 7\n", "b.xyz").cloud;
  EXPECT_EQ(flat.colors().scalar, (std::vector<double>{0.5, 0.5}));
  const auto bare = parse("0 0 0\n1 2 3\n", "c.xyz").cloud;
  EXPECT_EQ(bare.colors().scalar, (std::vector<double>{0.5, 0.5}));
}

TEST(CloudIo, ErrorsNameTheLine) {
  try {
    parse("0 0 0 1\n1 2 x 1\n", "bad.xyz");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.xyz:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("0 0 0 1\n1 2\n", "short.xyz"), DataError);
  EXPECT_THROW(parse("0 0 nan\n", "nan.xyz"), DataError);
  EXPECT_THROW(parse("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                     "property float z\nend_header\n0 0 0\n"),
               DataError);
  EXPECT_THROW(parse("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n0\n"), DataError);
}

TEST(CloudIo, BinaryAndAsciiRoundTripsAgree) {
  Gen g(17);
  std::vector<Vec3> pts;
  std::vector<double> inten;
  for (int i = 0; i < 100000; ++i) {
    pts.push_back(g.vec(-20, 20));
    inten.push_back(g.uniform(0, 1));
  }
  const PointCloud c(pts, ColorAttr::from_intensity(inten));
  const auto bin = parse(encode_ply(c, PlyEncoding::BinaryLE)).cloud;
  const auto asc = parse(encode_ply(c, PlyEncoding::Ascii)).cloud;
  EXPECT_TRUE(bin == c);
  EXPECT_TRUE(asc == bin);
  EXPECT_EQ(encode_ply(bin, PlyEncoding::BinaryLE), encode_ply(c, PlyEncoding::BinaryLE));
}

TEST(CloudIo, RoundTripsEveryColorKindAndLabels) {
  Gen g(18);
  const auto dir = test::scratch_dir("cloud_io");
  std::vector<Vec3> pts;
  std::vector<Rgb8> rgb;
  std::vector<double> sd;
  std::vector<std::uint32_t> labels;
  for (int i = 0; i < 500; ++i) {
    pts.push_back(g.vec(-1, 1));
    rgb.push_back({std::uint8_t(g.integer(0, 255)), std::uint8_t(g.integer(0, 255)), std::uint8_t(g.integer(0, 255))});
    sd.push_back(g.uniform(-0.01, 0.01));
    labels.push_back(g.integer(0, 9));
  }
  for (const PointCloud& c : {PointCloud(pts, ColorAttr::from_rgb(rgb)), PointCloud(pts, ColorAttr::from_signed_distance(sd))}) {
    for (auto enc : {PlyEncoding::Ascii, PlyEncoding::BinaryLE}) {
      save_ply(dir / "c.ply", c, enc, &labels);
      const auto back = read_cloud(dir / "c.ply");
      EXPECT_TRUE(back.cloud == c);
      ASSERT_TRUE(back.labels.has_value());
      EXPECT_EQ(*back.labels, labels);
    }
  }
  save_xyz(dir / "c.xyz", PointCloud(pts, ColorAttr::from_signed_distance(sd)));
  const auto xyz = load_point_cloud(dir / "c.xyz");
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(xyz.point(i), pts[i]);
  EXPECT_THROW(load_point_cloud(dir / "missing.ply"), DataError);
}

TEST(CloudIo, PlyIntensityOutsideUnitRangeIsNormalized) {
  const std::string text =
      "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
      "property float intensity\nend_header\n0 0 0 100\n1 0 0 300\n2 0 0 200\n";
  EXPECT_EQ(parse(text).cloud.colors().scalar, (std::vector<double>{0.0, 1.0, 0.5}));
  const std::string unit =
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
      "property float intensity\nend_header\n0 0 0 0.25\n1 0 0 0.75\n";
  EXPECT_EQ(parse(unit).cloud.colors().scalar, (std::vector<double>{0.25, 0.75}));
}
