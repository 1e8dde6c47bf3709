// vcqc - virtual camera quality control for printed filaments
//
// Point cloud container with a single per-point color attribute, plus the
// basic reductions used by camera placement (bounding box, centroid) and
// voxel subsampling.

#ifndef VCQC_GEOMETRY_POINT_CLOUD_HPP
#define VCQC_GEOMETRY_POINT_CLOUD_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vcqc/error.hpp"

namespace vcqc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// =============================================================================
// Color attribute
// =============================================================================

struct Rgb8 {
  std::uint8_t r{0}, g{0}, b{0};
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Meaning of the per-point color channel. It depends on the capture sensor:
/// cameras give RGB, laser scanners give backscatter intensity, and structured
/// light data is colored by signed distance to a reference surface.
enum class ColorKind : std::uint8_t { Rgb8, Intensity, SignedDistance };

inline const char* to_string(ColorKind kind) {
  switch (kind) {
    case ColorKind::Rgb8: return "rgb8";
    case ColorKind::Intensity: return "intensity";
    case ColorKind::SignedDistance: return "signed_distance";
  }
  return "?";
}

/**
 * @brief One color attribute per point.
 *
 * Exactly one of `rgb` / `scalar` is populated depending on `kind`.
 * Intensity values are normalized to [0,1]; signed distances are metres.
 */
struct ColorAttr {
  ColorKind kind{ColorKind::Intensity};
  std::vector<Rgb8> rgb;
  std::vector<double> scalar;

  static ColorAttr from_rgb(std::vector<Rgb8> v) {
    ColorAttr c;
    c.kind = ColorKind::Rgb8;
    c.rgb = std::move(v);
    return c;
  }
  static ColorAttr from_intensity(std::vector<double> v) {
    ColorAttr c;
    c.kind = ColorKind::Intensity;
    c.scalar = std::move(v);
    return c;
  }
  static ColorAttr from_signed_distance(std::vector<double> v) {
    ColorAttr c;
    c.kind = ColorKind::SignedDistance;
    c.scalar = std::move(v);
    return c;
  }

  [[nodiscard]] std::size_t size() const {
    return kind == ColorKind::Rgb8 ? rgb.size() : scalar.size();
  }

  friend bool operator==(const ColorAttr&, const ColorAttr&) = default;
};

// =============================================================================
// PointCloud
// =============================================================================

/**
 * @brief Immutable set of 3D points (metres) with one color attribute.
 *
 * Point index = position in the point vector. Operations that do not remove
 * points keep indices stable, which is what lets rendered pixels refer back
 * to their source points.
 */
class PointCloud {
 public:
  PointCloud() = default;

  PointCloud(std::vector<Vec3> points, ColorAttr colors)
      : points_(std::move(points)), colors_(std::move(colors)) {
    if (colors_.size() != points_.size()) {
      throw InvalidArgument("PointCloud: " + std::to_string(colors_.size()) +
                            " colors for " + std::to_string(points_.size()) +
                            " points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!points_[i].allFinite()) {
        throw InvalidArgument("PointCloud: non-finite coordinate at point " +
                              std::to_string(i));
      }
    }
    if (colors_.kind == ColorKind::Intensity) {
      for (double v : colors_.scalar) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw InvalidArgument("PointCloud: intensity outside [0,1]");
        }
      }
    } else if (colors_.kind == ColorKind::SignedDistance) {
      for (double v : colors_.scalar) {
        if (!std::isfinite(v)) {
          throw InvalidArgument("PointCloud: non-finite signed distance");
        }
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
  [[nodiscard]] const std::vector<Vec3>& points() const noexcept {
    return points_;
  }
  [[nodiscard]] const Vec3& point(std::size_t i) const { return points_[i]; }
  [[nodiscard]] const ColorAttr& colors() const noexcept { return colors_; }

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.points_ == b.points_ && a.colors_ == b.colors_;
  }

 private:
  std::vector<Vec3> points_;
  ColorAttr colors_;
};

// =============================================================================
// Bounding geometry
// =============================================================================

struct AABB {
  Vec3 min{Vec3::Zero()};
  Vec3 max{Vec3::Zero()};

  [[nodiscard]] Vec3 center() const { return 0.5 * (min + max); }
  [[nodiscard]] Vec3 extent() const { return max - min; }
  [[nodiscard]] bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

inline AABB compute_aabb(const PointCloud& cloud) {
  if (cloud.empty()) throw InvalidArgument("compute_aabb: empty cloud");
  AABB box{cloud.point(0), cloud.point(0)};
  for (const Vec3& p : cloud.points()) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

namespace detail {

// Neumaier compensated sum; sequential so the result is order-deterministic.
struct CompensatedSum {
  double sum{0.0};
  double carry{0.0};
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + carry; }
};

}  // namespace detail

inline Vec3 compute_centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw InvalidArgument("compute_centroid: empty cloud");
  std::array<detail::CompensatedSum, 3> acc;
  for (const Vec3& p : cloud.points()) {
    for (int k = 0; k < 3; ++k) acc[k].add(p[k]);
  }
  const double n = static_cast<double>(cloud.size());
  return {acc[0].value() / n, acc[1].value() / n, acc[2].value() / n};
}

// =============================================================================
// Plane and signed distance coloring
// =============================================================================

/// Plane in Hessian form: signed_distance(p) = normal . p - offset.
struct Plane {
  Vec3 normal{0.0, 0.0, 1.0};
  double offset{0.0};

  [[nodiscard]] double signed_distance(const Vec3& p) const {
    return normal.dot(p) - offset;
  }
  [[nodiscard]] bool valid() const {
    return normal.allFinite() && std::isfinite(offset) &&
           std::abs(normal.norm() - 1.0) <= 1e-9;
  }
};

/// Replaces the color attribute with signed distances to `plane`.
/// Coordinates and order are untouched.
inline PointCloud signed_distance_colorize(const PointCloud& cloud,
                                           const Plane& plane) {
  if (!plane.valid()) {
    throw InvalidArgument("signed_distance_colorize: plane normal not unit");
  }
  std::vector<double> dist(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    dist[i] = plane.signed_distance(cloud.point(i));
  }
  return PointCloud(cloud.points(), ColorAttr::from_signed_distance(std::move(dist)));
}

// =============================================================================
// Voxel subsampling
// =============================================================================

struct VoxelSubsample {
  PointCloud cloud;
  /// sources[i] lists the input indices merged into output point i.
  std::vector<std::vector<std::uint32_t>> sources;
};

/**
 * @brief Keeps one representative per occupied voxel: the centroid of its
 * members, with the attribute averaged (RGB rounded to nearest).
 *
 * Output points appear in order of the first input point that hit each voxel.
 */
inline VoxelSubsample voxel_subsample(const PointCloud& cloud, double voxel_m) {
  if (!(voxel_m > 0.0) || !std::isfinite(voxel_m)) {
    throw InvalidArgument("voxel_subsample: voxel size must be > 0");
  }
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::size_t h = 1469598103934665603ULL;
      for (auto v : k) {
        h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::uint32_t, KeyHash> slot;
  std::vector<std::vector<std::uint32_t>> sources;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.point(i);
    const std::array<std::int64_t, 3> key{
        static_cast<std::int64_t>(std::floor(p.x() / voxel_m)),
        static_cast<std::int64_t>(std::floor(p.y() / voxel_m)),
        static_cast<std::int64_t>(std::floor(p.z() / voxel_m))};
    auto [it, inserted] =
        slot.try_emplace(key, static_cast<std::uint32_t>(sources.size()));
    if (inserted) sources.emplace_back();
    sources[it->second].push_back(static_cast<std::uint32_t>(i));
  }

  const ColorAttr& in = cloud.colors();
  std::vector<Vec3> pts;
  pts.reserve(sources.size());
  ColorAttr out;
  out.kind = in.kind;
  for (const auto& members : sources) {
    Vec3 sum = Vec3::Zero();
    double scalar = 0.0;
    std::array<double, 3> rgb{0, 0, 0};
    for (std::uint32_t m : members) {
      sum += cloud.point(m);
      if (in.kind == ColorKind::Rgb8) {
        rgb[0] += in.rgb[m].r;
        rgb[1] += in.rgb[m].g;
        rgb[2] += in.rgb[m].b;
      } else {
        scalar += in.scalar[m];
      }
    }
    const double n = static_cast<double>(members.size());
    pts.push_back(sum / n);
    if (in.kind == ColorKind::Rgb8) {
      out.rgb.push_back({static_cast<std::uint8_t>(std::lround(rgb[0] / n)),
                         static_cast<std::uint8_t>(std::lround(rgb[1] / n)),
                         static_cast<std::uint8_t>(std::lround(rgb[2] / n))});
    } else {
      // Clamp guards the [0,1] intensity invariant against rounding.
      double v = scalar / n;
      if (in.kind == ColorKind::Intensity) v = std::min(1.0, std::max(0.0, v));
      out.scalar.push_back(v);
    }
  }
  return {PointCloud(std::move(pts), std::move(out)), std::move(sources)};
}

/// Subset of `cloud` at `indices`, in the given order.
inline PointCloud select(const PointCloud& cloud,
                         const std::vector<std::uint32_t>& indices) {
  std::vector<Vec3> pts;
  pts.reserve(indices.size());
  ColorAttr c;
  c.kind = cloud.colors().kind;
  for (std::uint32_t i : indices) {
    pts.push_back(cloud.point(i));
    if (c.kind == ColorKind::Rgb8) {
      c.rgb.push_back(cloud.colors().rgb[i]);
    } else {
      c.scalar.push_back(cloud.colors().scalar[i]);
    }
  }
  return PointCloud(std::move(pts), std::move(c));
}

}  // namespace vcqc

#endif  // VCQC_GEOMETRY_POINT_CLOUD_HPP
