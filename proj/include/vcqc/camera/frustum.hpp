// vcqc - virtual camera quality control for printed filaments
//
// View frustum of the full image extent and point clipping against it.

#ifndef VCQC_CAMERA_FRUSTUM_HPP
#define VCQC_CAMERA_FRUSTUM_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "vcqc/camera/camera.hpp"

namespace vcqc {

/**
 * @brief Six inward-facing world-frame planes bounding the view volume.
 *
 * A plane keeps points with normal . p + d >= 0. The right and bottom planes
 * are strict (> 0) so that membership matches the pixel test 0 <= u < W,
 * 0 <= v < H exactly.
 */
struct Frustum {
  enum Face { Near = 0, Far, Left, Right, Top, Bottom };

  struct HalfSpace {
    Vec3 normal{Vec3::UnitZ()};
    double d{0.0};
    [[nodiscard]] double signed_distance(const Vec3& p) const { return normal.dot(p) + d; }
  };

  std::array<HalfSpace, 6> planes{};
  double near_m{0.05};
  double far_m{1.0};

  [[nodiscard]] bool contains(const Vec3& p) const {
    for (int f = 0; f < 6; ++f) {
      const double s = planes[f].signed_distance(p);
      const bool strict = (f == Right || f == Bottom);
      if (strict ? !(s > 0.0) : !(s >= 0.0)) return false;
    }
    return true;
  }
};

inline Frustum build_frustum(const Pose& pose, const Intrinsics& intr, double near_m,
                             double far_m) {
  if (!(near_m > 0.0) || !(far_m > near_m) || !std::isfinite(far_m)) {
    throw InvalidArgument("build_frustum: need 0 < near < far");
  }
  intr.validate();
  const double f = intr.focal_px();
  const double w = intr.width_px, h = intr.height_px;
  // Camera-frame half-spaces n . p_c + d >= 0.
  const std::array<std::pair<Vec3, double>, 6> cam{{
      {Vec3(0, 0, 1), -near_m},           // z >= near
      {Vec3(0, 0, -1), far_m},            // z <= far
      {Vec3(f, 0, intr.cx), 0.0},         // u >= 0
      {Vec3(-f, 0, w - intr.cx), 0.0},    // u < W
      {Vec3(0, f, intr.cy), 0.0},         // v >= 0
      {Vec3(0, -f, h - intr.cy), 0.0},    // v < H
  }};
  Frustum fr;
  fr.near_m = near_m;
  fr.far_m = far_m;
  for (int i = 0; i < 6; ++i) {
    const double scale = cam[i].first.norm();
    const Vec3 nc = cam[i].first / scale;
    const double dc = cam[i].second / scale;
    // n_c . (R p + t) + d_c = (R^T n_c) . p + (n_c . t + d_c)
    fr.planes[i].normal = pose.rotation.transpose() * nc;
    fr.planes[i].d = nc.dot(pose.translation) + dc;
  }
  return fr;
}

/// Indices of points inside the frustum, ascending. The cloud is untouched.
inline std::vector<std::uint32_t> clip(const PointCloud& cloud, const Frustum& frustum) {
  std::vector<std::uint32_t> keep;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (frustum.contains(cloud.point(i))) keep.push_back(static_cast<std::uint32_t>(i));
  }
  return keep;
}

}  // namespace vcqc

#endif  // VCQC_CAMERA_FRUSTUM_HPP
