// vcqc - virtual camera quality control for printed filaments
//
// Synthetic printed objects with ground-truth layer labels.
//
// Layers stack along +z; layer t (0-based) is centered at z = (t + 0.5) * h.
// Only the side facing -y is sampled, as seen by a single capture position.
// The face of each filament bulges toward the viewer and recedes by
// `groove_depth` where adjacent layers meet. Per-point intensity follows the
// incidence angle of a viewer looking along +y, so grooves come out dark.

#ifndef VCQC_SYNTH_PRINTED_WALL_HPP
#define VCQC_SYNTH_PRINTED_WALL_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vcqc/geometry/point_cloud.hpp"

namespace vcqc {

enum class PathKind { Straight, Helical };
enum class CrossSection { Stadium, Elliptical };

inline CrossSection parse_cross_section(std::string_view s) {
  if (s == "stadium") return CrossSection::Stadium;
  if (s == "elliptical") return CrossSection::Elliptical;
  throw InvalidArgument("unknown cross section '" + std::string(s) + "'");
}

inline PathKind parse_path_kind(std::string_view s) {
  if (s == "straight") return PathKind::Straight;
  if (s == "helical") return PathKind::Helical;
  throw InvalidArgument("unknown path '" + std::string(s) + "'");
}

struct SynthSpec {
  int n_layers{5};
  double filament_height_mm{10.0};
  double filament_width_mm{20.0};
  PathKind path{PathKind::Straight};
  double length_m{1.2};    ///< straight
  double radius_m{0.3};    ///< helical, path centerline radius
  double pitch_mm{10.0};   ///< helical, rise per turn
  double turns{5.0};       ///< helical
  CrossSection cross_section{CrossSection::Stadium};
  double surface_noise_sigma_mm{0.0};
  double point_spacing_mm{0.5};
  double groove_depth_mm{4.0};

  void validate() const {
    auto pos = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("SynthSpec: ") + what + " must be > 0");
    };
    if (n_layers < 1) throw InvalidArgument("SynthSpec: n_layers must be >= 1");
    pos(filament_height_mm, "filament_height_mm");
    pos(filament_width_mm, "filament_width_mm");
    pos(point_spacing_mm, "point_spacing_mm");
    pos(groove_depth_mm, "groove_depth_mm");
    if (!(surface_noise_sigma_mm >= 0.0)) throw InvalidArgument("SynthSpec: noise sigma must be >= 0");
    if (point_spacing_mm > filament_height_mm / 4.0) {
      throw InvalidArgument("SynthSpec: point spacing must be <= filament height / 4");
    }
    if (groove_depth_mm > filament_width_mm / 2.0) {
      throw InvalidArgument("SynthSpec: groove depth must be <= filament width / 2");
    }
    if (path == PathKind::Straight) {
      pos(length_m, "length_m");
    } else {
      pos(radius_m, "radius_m");
      pos(pitch_mm, "pitch_mm");
      pos(turns, "turns");
      if (static_cast<int>(std::ceil(turns)) != n_layers) {
        throw InvalidArgument("SynthSpec: helical path needs n_layers == ceil(turns)");
      }
    }
  }
};

/// Ground truth of one layer.
struct LayerTruth {
  std::uint32_t label{0};
  double z_min_m{0.0};
  double z_max_m{0.0};
  double thickness_mm{0.0};
};

struct SynthCloud {
  PointCloud cloud;
  std::vector<std::uint32_t> labels;  ///< layer t -> t + 1
  std::vector<LayerTruth> layers;
};

/// Surface profile across one filament at offset dz from its center line
/// (metres): how far the face recedes from its front-most position, and the
/// incidence cosine for a viewer looking at the face head-on.
struct FaceSample {
  double recess_m{0.0};
  double incidence{1.0};
};

inline FaceSample face_profile(const SynthSpec& spec, double dz_m) {
  const double half = spec.filament_height_mm * 1e-3 / 2.0;
  const double depth = spec.groove_depth_mm * 1e-3;
  const double a = std::min(std::abs(dz_m), half);
  if (spec.cross_section == CrossSection::Stadium) {
    // Flat front with rounded edges of radius min(depth, half).
    const double rc = std::min(depth, half);
    const double e = a - (half - rc);
    if (e <= 0.0) return {0.0, 1.0};
    const double c = std::sqrt(std::max(0.0, rc * rc - e * e));
    return {rc - c, c / rc};
  }
  // Half ellipse: semi-axis `half` along z, `depth` toward the viewer.
  const double r = std::sqrt(std::max(0.0, 1.0 - (a / half) * (a / half)));
  const double recess = depth * (1.0 - r);
  if (r <= 0.0) return {recess, 0.0};
  const double slope = depth * (a / (half * half)) / r;
  return {recess, 1.0 / std::sqrt(1.0 + slope * slope)};
}

/**
 * @brief Samples the camera-facing surface of a layered print.
 *
 * Deterministic for a fixed seed (std::mt19937_64 + normal_distribution).
 * Noise displaces points along the viewing axis only.
 */
inline SynthCloud generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const double h = spec.filament_height_mm * 1e-3;
  const double half_w = spec.filament_width_mm * 1e-3 / 2.0;
  const double step = spec.point_spacing_mm * 1e-3;
  const double sigma = spec.surface_noise_sigma_mm * 1e-3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int nz = static_cast<int>(std::ceil(h / step));
  std::vector<Vec3> pts;
  std::vector<double> intensity;
  std::vector<std::uint32_t> labels;

  auto emit = [&](const Vec3& p, double inten, std::uint32_t label) {
    pts.push_back(p);
    intensity.push_back(std::clamp(inten, 0.0, 1.0));
    labels.push_back(label);
  };

  SynthCloud out;
  if (spec.path == PathKind::Straight) {
    const int nx = static_cast<int>(std::floor(spec.length_m / step)) + 1;
    for (int t = 0; t < spec.n_layers; ++t) {
      const double zc = (t + 0.5) * h;
      for (int j = 0; j < nz; ++j) {
        const double dz = -h / 2.0 + (j + 0.5) * h / nz;
        const FaceSample f = face_profile(spec, dz);
        for (int i = 0; i < nx; ++i) {
          const double y = -half_w + f.recess_m + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
          emit({i * step, y, zc + dz}, f.incidence, static_cast<std::uint32_t>(t + 1));
        }
      }
      out.layers.push_back({static_cast<std::uint32_t>(t + 1), zc - h / 2.0, zc + h / 2.0, spec.filament_height_mm});
    }
  } else {
    const double rise = spec.pitch_mm * 1e-3;
    const double outer = spec.radius_m + half_w;
    const double dtheta = step / outer;
    const double total = 2.0 * std::numbers::pi * spec.turns;
    const long n_theta = static_cast<long>(std::floor(total / dtheta)) + 1;
    for (long k = 0; k < n_theta; ++k) {
      const double theta = k * dtheta;
      const double s = std::sin(theta), c = std::cos(theta);
      if (!(s < 0.0)) continue;  // camera-facing half: outward normal has -y
      const int t = std::min(static_cast<int>(theta / (2.0 * std::numbers::pi)), spec.n_layers - 1);
      const double zc = h / 2.0 + rise * theta / (2.0 * std::numbers::pi);
      for (int j = 0; j < nz; ++j) {
        const double dz = -h / 2.0 + (j + 0.5) * h / nz;
        const FaceSample f = face_profile(spec, dz);
        const double r = outer - f.recess_m + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
        // Incidence against a viewer looking along +y.
        emit({r * c, r * s, zc + dz}, f.incidence * (-s), static_cast<std::uint32_t>(t + 1));
      }
    }
    for (int t = 0; t < spec.n_layers; ++t) {
      const double z0 = h / 2.0 + rise * t;
      out.layers.push_back({static_cast<std::uint32_t>(t + 1), z0 - h / 2.0, z0 + rise + h / 2.0, spec.filament_height_mm});
    }
  }
  out.cloud = PointCloud(std::move(pts), ColorAttr::from_intensity(std::move(intensity)));
  out.labels = std::move(labels);
  return out;
}

}  // namespace vcqc

#endif  // VCQC_SYNTH_PRINTED_WALL_HPP
