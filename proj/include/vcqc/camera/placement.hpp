// vcqc - virtual camera quality control for printed filaments
//
// Virtual camera placement strategies.
//
//   Predefined position (PP): the image plane is parallel to one side of the
//   bounding box and the optical axis hits that side at its center.
//   Known sensor position (KSP): the optical axis runs from the capture sensor
//   through the cloud centroid, either directly or projected onto the
//   horizontal plane through the centroid.
//
// World up is +z. Roll is fixed so world +z maps to image up; when the camera
// looks straight down, world +y maps to image up instead.

#ifndef VCQC_CAMERA_PLACEMENT_HPP
#define VCQC_CAMERA_PLACEMENT_HPP

#include <string>
#include <string_view>

#include "vcqc/camera/camera.hpp"

namespace vcqc {

enum class BoxSide { PosX, NegX, PosY, NegY, Top };

inline BoxSide parse_box_side(std::string_view s) {
  if (s == "+x" || s == "x") return BoxSide::PosX;
  if (s == "-x") return BoxSide::NegX;
  if (s == "+y" || s == "y") return BoxSide::PosY;
  if (s == "-y") return BoxSide::NegY;
  if (s == "top" || s == "+z") return BoxSide::Top;
  throw InvalidArgument("unknown box side '" + std::string(s) + "'");
}

enum class KspMode { Direct, Horizontal };

inline KspMode parse_ksp_mode(std::string_view s) {
  if (s == "direct") return KspMode::Direct;
  if (s == "horizontal") return KspMode::Horizontal;
  throw InvalidArgument("unknown ksp mode '" + std::string(s) + "'");
}

/**
 * @brief Pose of a camera at `center` looking along `forward`.
 *
 * Image up follows world +z projected perpendicular to the axis, or world +y
 * when the axis is (anti)parallel to z.
 */
inline Pose look_along(const Vec3& center, const Vec3& forward) {
  const double len = forward.norm();
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw InvalidArgument("look_along: zero view direction");
  }
  const Vec3 z = forward / len;
  Vec3 up = Vec3::UnitZ() - z.z() * z;
  if (up.norm() < 1e-9) up = Vec3::UnitY() - z.y() * z;
  const Vec3 y = -up.normalized();  // image rows grow downward
  const Vec3 x = y.cross(z);
  Pose pose;
  pose.rotation.row(0) = x.transpose();
  pose.rotation.row(1) = y.transpose();
  pose.rotation.row(2) = z.transpose();
  pose.translation = -pose.rotation * center;
  return pose;
}

/// PP placement: camera `working_distance_m` outside the chosen side, looking
/// back at the side center along its inward normal.
inline Pose place_pp(const AABB& box, BoxSide side, const Intrinsics& intr,
                     double working_distance_m) {
  intr.validate();
  detail::require_positive(working_distance_m, "place_pp: working distance");
  const Vec3 c = box.center();
  const Vec3 e = box.extent();
  Vec3 face_center = c;
  Vec3 outward;
  double a = 0, b = 0;  // side extents
  switch (side) {
    case BoxSide::PosX: face_center.x() = box.max.x(); outward = Vec3::UnitX(); a = e.y(); b = e.z(); break;
    case BoxSide::NegX: face_center.x() = box.min.x(); outward = -Vec3::UnitX(); a = e.y(); b = e.z(); break;
    case BoxSide::PosY: face_center.y() = box.max.y(); outward = Vec3::UnitY(); a = e.x(); b = e.z(); break;
    case BoxSide::NegY: face_center.y() = box.min.y(); outward = -Vec3::UnitY(); a = e.x(); b = e.z(); break;
    case BoxSide::Top: face_center.z() = box.max.z(); outward = Vec3::UnitZ(); a = e.x(); b = e.y(); break;
  }
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InvalidArgument("place_pp: chosen bounding box side has zero area");
  }
  return look_along(face_center + working_distance_m * outward, -outward);
}

/// KSP placement: the camera sits on the sensor-centroid axis at
/// `working_distance_m` from the centroid, looking at it.
inline Pose place_ksp(const Vec3& sensor_pos, const Vec3& centroid, KspMode mode,
                      double working_distance_m) {
  detail::require_positive(working_distance_m, "place_ksp: working distance");
  Vec3 axis = centroid - sensor_pos;
  if (axis.norm() < 1e-12) {
    throw InvalidArgument("place_ksp: sensor position coincides with centroid");
  }
  if (mode == KspMode::Horizontal) {
    axis.z() = 0.0;
    if (axis.norm() < 1e-12) {
      throw InvalidArgument("place_ksp: sensor is vertically above/below the centroid");
    }
  }
  axis.normalize();
  return look_along(centroid - working_distance_m * axis, axis);
}

}  // namespace vcqc

#endif  // VCQC_CAMERA_PLACEMENT_HPP
