// vcqc - virtual camera quality control for printed filaments
//
// Ideal pinhole camera: intrinsics, Euler-angle pose, ground sampling distance
// planning and point projection.
//
// Camera frame convention: +z is the optical axis (forward), +x points to the
// image right, +y points to the image bottom. p_cam = R * p_world + t.

#ifndef VCQC_CAMERA_CAMERA_HPP
#define VCQC_CAMERA_CAMERA_HPP

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>

#include "vcqc/error.hpp"
#include "vcqc/geometry/point_cloud.hpp"

namespace vcqc {

// =============================================================================
// Intrinsics
// =============================================================================

/// Single focal length with square pixels: fx = fy = focal_mm / pixel_size_mm.
struct Intrinsics {
  double focal_mm{4.0};
  double pixel_size_mm{0.004};
  int width_px{512};
  int height_px{512};
  double cx{256.0};
  double cy{256.0};

  [[nodiscard]] double focal_px() const { return focal_mm / pixel_size_mm; }

  /// 3x3 calibration matrix K.
  [[nodiscard]] Mat3 K() const {
    Mat3 k;
    k << focal_px(), 0.0, cx, 0.0, focal_px(), cy, 0.0, 0.0, 1.0;
    return k;
  }

  void validate() const {
    if (!(focal_mm > 0.0) || !(pixel_size_mm > 0.0)) {
      throw InvalidArgument("Intrinsics: focal_mm and pixel_size_mm must be > 0");
    }
    if (width_px < 1 || height_px < 1) {
      throw InvalidArgument("Intrinsics: image dimensions must be >= 1");
    }
    if (!(cx >= 0.0 && cx < width_px && cy >= 0.0 && cy < height_px)) {
      throw InvalidArgument("Intrinsics: principal point outside the image");
    }
  }

  /// Same optics with the principal point at the image center.
  static Intrinsics centered(double focal_mm, double pixel_size_mm, int w, int h) {
    Intrinsics k{focal_mm, pixel_size_mm, w, h, w / 2.0, h / 2.0};
    k.validate();
    return k;
  }
};

// =============================================================================
// Ground sampling distance
// =============================================================================

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be finite and > 0");
  }
}
}  // namespace detail

/// Object-space size of one pixel (m/px) at working distance `distance_m`.
inline double gsd(double distance_m, double pixel_size_mm, double focal_mm) {
  detail::require_positive(distance_m, "gsd: distance");
  detail::require_positive(pixel_size_mm, "gsd: pixel size");
  detail::require_positive(focal_mm, "gsd: focal length");
  return distance_m * pixel_size_mm / focal_mm;
}

/// Working distance (m) that yields `target_gsd` (m/px) for the given optics.
inline double working_distance(double target_gsd, double pixel_size_mm, double focal_mm) {
  detail::require_positive(target_gsd, "working_distance: target gsd");
  detail::require_positive(pixel_size_mm, "working_distance: pixel size");
  detail::require_positive(focal_mm, "working_distance: focal length");
  return target_gsd * focal_mm / pixel_size_mm;
}

/// Largest GSD that still resolves the groove between adjacent filaments:
/// half the gap, never coarser than 1 mm/px.
inline double shannon_gsd(double inter_filament_gap_m) {
  detail::require_positive(inter_filament_gap_m, "shannon_gsd: gap");
  constexpr double kMaxGsd = 0.001;
  return std::min(inter_filament_gap_m / 2.0, kMaxGsd);
}

// =============================================================================
// Pose
// =============================================================================

/// Rotation angles (radians): psi about z, phi about y, theta about x.
struct EulerAngles {
  double psi{0.0};
  double phi{0.0};
  double theta{0.0};
};

inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}
inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}
inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

/// R = Rx(theta) * Ry(phi) * Rz(psi): a vector is rotated about z first,
/// then y, then x (extrinsic z-y-x).
inline Mat3 euler_to_rotation(const EulerAngles& a) {
  if (!std::isfinite(a.psi) || !std::isfinite(a.phi) || !std::isfinite(a.theta)) {
    throw InvalidArgument("euler_to_rotation: non-finite angle");
  }
  return rot_x(a.theta) * rot_y(a.phi) * rot_z(a.psi);
}

/// World-to-camera rigid transform.
struct Pose {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};

  [[nodiscard]] Vec3 to_camera(const Vec3& p) const { return rotation * p + translation; }
  /// Camera center in world coordinates.
  [[nodiscard]] Vec3 center() const { return -rotation.transpose() * translation; }
  /// Optical axis (camera +z) in world coordinates.
  [[nodiscard]] Vec3 forward() const { return rotation.row(2).transpose(); }

  void validate() const {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw InvalidArgument("Pose: non-finite entries");
    }
    const double ortho =
        (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
      throw InvalidArgument("Pose: rotation is not a proper orthonormal matrix");
    }
  }
};

// =============================================================================
// Projection
// =============================================================================

struct Projection {
  double u{0.0};      ///< pixels, column axis
  double v{0.0};      ///< pixels, row axis
  double depth{0.0};  ///< metres along the optical axis
};

/// Pinhole projection without distortion. Returns nullopt for points at or
/// behind the camera plane (depth <= 0).
inline std::optional<Projection> project(const Pose& pose, const Intrinsics& intr,
                                         const Vec3& p) {
  const Vec3 pc = pose.to_camera(p);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const double f = intr.focal_px();
  return Projection{f * pc.x() / pc.z() + intr.cx, f * pc.y() / pc.z() + intr.cy, pc.z()};
}

/// Pixel containing a projected coordinate: pixel i covers [i, i+1).
inline long pixel_of(double coord) { return static_cast<long>(std::floor(coord)); }

}  // namespace vcqc

#endif  // VCQC_CAMERA_CAMERA_HPP
