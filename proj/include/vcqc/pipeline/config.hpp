// vcqc - virtual camera quality control for printed filaments
//
// Pipeline configuration: flat INI sections plus `section.key=value`
// overrides. Everything is validated before any command touches its inputs
// or outputs.
//
//   [input]         path, format (auto|ply|ply_ascii|ply_binary_le|xyz)
//   [camera]        focal_mm, pixel_size_mm, width_px, height_px (0 = derive
//                   from the object extent), cx, cy, mode (pp|ksp), side,
//                   sensor_pos (x,y,z), ksp_mode (direct|horizontal), near_m,
//                   far_m (default 4 x working distance), target_gsd_m
//   [render]        splat_radius_px, colormap_range_m, hole_fill (none|close3),
//                   threads
//   [tiling]        tile_px, overlap_px, iou_threshold
//   [segmentation]  backend (baseline|external), external_dir, groove_k,
//                   min_area_px, contrast_floor, min_confidence
//   [profile]       mode (max|mean), plan
//   [output]        dir

#ifndef VCQC_PIPELINE_CONFIG_HPP
#define VCQC_PIPELINE_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vcqc/camera/placement.hpp"
#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/profile/thickness.hpp"
#include "vcqc/render/renderer.hpp"
#include "vcqc/segmentation/baseline.hpp"

namespace vcqc {

enum class CameraMode { PP, KSP };

struct CameraConfig {
  double focal_mm{4.0};
  double pixel_size_mm{0.004};
  int width_px{0};
  int height_px{0};
  std::optional<double> cx;
  std::optional<double> cy;
  CameraMode mode{CameraMode::PP};
  BoxSide side{BoxSide::NegY};
  std::optional<Vec3> sensor_pos;
  KspMode ksp_mode{KspMode::Direct};
  double near_m{0.05};
  std::optional<double> far_m;
  double target_gsd_m{0.001};
};

struct TilingConfig {
  int tile_px{512};
  int overlap_px{64};
  double iou_threshold{0.5};
};

struct SegmentationConfig {
  Backend backend{Backend::Baseline};
  std::filesystem::path external_dir;
  BaselineParams baseline;
  double min_confidence{0.0};
};

struct ProfileConfig {
  ProfileMode mode{ProfileMode::Max};
  std::filesystem::path plan;
};

struct PipelineConfig {
  std::filesystem::path input;
  CloudFormat input_format{CloudFormat::Auto};
  CameraConfig camera;
  SplatConfig render;
  int render_threads{1};
  TilingConfig tiling;
  SegmentationConfig segmentation;
  ProfileConfig profile;
  std::filesystem::path output_dir;
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
  std::vector<double> xs;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto a = tok.find_first_not_of(" \t"), b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) throw ConfigError(key + ": expected x,y,z, got '" + v + "'");
    xs.push_back(parse_real(key, tok.substr(a, b - a + 1)));
  }
  if (xs.size() != 3) throw ConfigError(key + ": expected x,y,z, got '" + v + "'");
  return {xs[0], xs[1], xs[2]};
}

// Wraps a module parser so its InvalidArgument surfaces as a config error.
template <class F>
auto parse_enum(const std::string& key, const std::string& v, F f) {
  try {
    return f(v);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"input.path", [](PipelineConfig& c, auto&, auto& v) { c.input = v; }},
      {"input.format", [](PipelineConfig& c, auto& k, auto& v) { c.input_format = parse_enum(k, v, parse_cloud_format); }},
      {"camera.focal_mm", [](PipelineConfig& c, auto& k, auto& v) { c.camera.focal_mm = parse_real(k, v); }},
      {"camera.pixel_size_mm",
       [](PipelineConfig& c, auto& k, auto& v) { c.camera.pixel_size_mm = parse_real(k, v); }},
      {"camera.width_px", [](PipelineConfig& c, auto& k, auto& v) { c.camera.width_px = parse_int(k, v); }},
      {"camera.height_px", [](PipelineConfig& c, auto& k, auto& v) { c.camera.height_px = parse_int(k, v); }},
      {"camera.cx", [](PipelineConfig& c, auto& k, auto& v) { c.camera.cx = parse_real(k, v); }},
      {"camera.cy", [](PipelineConfig& c, auto& k, auto& v) { c.camera.cy = parse_real(k, v); }},
      {"camera.mode",
       [](PipelineConfig& c, auto& k, auto& v) {
         if (v == "pp") {
           c.camera.mode = CameraMode::PP;
         } else if (v == "ksp") {
           c.camera.mode = CameraMode::KSP;
         } else {
           throw ConfigError(k + ": expected pp or ksp, got '" + v + "'");
         }
       }},
      {"camera.side", [](PipelineConfig& c, auto& k, auto& v) { c.camera.side = parse_enum(k, v, parse_box_side); }},
      {"camera.sensor_pos", [](PipelineConfig& c, auto& k, auto& v) { c.camera.sensor_pos = parse_vec3(k, v); }},
      {"camera.ksp_mode",
       [](PipelineConfig& c, auto& k, auto& v) { c.camera.ksp_mode = parse_enum(k, v, parse_ksp_mode); }},
      {"camera.near_m", [](PipelineConfig& c, auto& k, auto& v) { c.camera.near_m = parse_real(k, v); }},
      {"camera.far_m", [](PipelineConfig& c, auto& k, auto& v) { c.camera.far_m = parse_real(k, v); }},
      {"camera.target_gsd_m",
       [](PipelineConfig& c, auto& k, auto& v) { c.camera.target_gsd_m = parse_real(k, v); }},
      {"render.splat_radius_px", [](PipelineConfig& c, auto& k, auto& v) { c.render.radius_px = parse_int(k, v); }},
      {"render.colormap_range_m",
       [](PipelineConfig& c, auto& k, auto& v) { c.render.colormap_range_m = parse_real(k, v); }},
      {"render.hole_fill",
       [](PipelineConfig& c, auto& k, auto& v) { c.render.hole_fill = parse_enum(k, v, parse_hole_fill); }},
      {"render.threads", [](PipelineConfig& c, auto& k, auto& v) { c.render_threads = parse_int(k, v); }},
      {"tiling.tile_px", [](PipelineConfig& c, auto& k, auto& v) { c.tiling.tile_px = parse_int(k, v); }},
      {"tiling.overlap_px", [](PipelineConfig& c, auto& k, auto& v) { c.tiling.overlap_px = parse_int(k, v); }},
      {"tiling.iou_threshold",
       [](PipelineConfig& c, auto& k, auto& v) { c.tiling.iou_threshold = parse_real(k, v); }},
      {"segmentation.backend",
       [](PipelineConfig& c, auto& k, auto& v) {
         if (v == "baseline") {
           c.segmentation.backend = Backend::Baseline;
         } else if (v == "external") {
           c.segmentation.backend = Backend::External;
         } else {
           throw ConfigError(k + ": expected baseline or external, got '" + v + "'");
         }
       }},
      {"segmentation.external_dir", [](PipelineConfig& c, auto&, auto& v) { c.segmentation.external_dir = v; }},
      {"segmentation.groove_k",
       [](PipelineConfig& c, auto& k, auto& v) { c.segmentation.baseline.groove_k = parse_real(k, v); }},
      {"segmentation.min_area_px",
       [](PipelineConfig& c, auto& k, auto& v) {
         const int n = parse_int(k, v);
         if (n < 0) throw ConfigError(k + ": must be >= 0");
         c.segmentation.baseline.min_area_px = static_cast<std::size_t>(n);
       }},
      {"segmentation.contrast_floor",
       [](PipelineConfig& c, auto& k, auto& v) { c.segmentation.baseline.contrast_floor = parse_real(k, v); }},
      {"segmentation.min_confidence",
       [](PipelineConfig& c, auto& k, auto& v) { c.segmentation.min_confidence = parse_real(k, v); }},
      {"profile.mode",
       [](PipelineConfig& c, auto& k, auto& v) { c.profile.mode = parse_enum(k, v, parse_profile_mode); }},
      {"profile.plan", [](PipelineConfig& c, auto&, auto& v) { c.profile.plan = v; }},
      {"output.dir", [](PipelineConfig& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

inline void apply(PipelineConfig& c, const std::string& key, const std::string& value) {
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(c, key, value);
}

}  // namespace detail

/// Numeric and cross-field checks; path existence is checked per command.
inline void validate(const PipelineConfig& c) {
  const auto& cam = c.camera;
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + ": must be > 0");
  };
  positive(cam.focal_mm, "camera.focal_mm");
  positive(cam.pixel_size_mm, "camera.pixel_size_mm");
  positive(cam.target_gsd_m, "camera.target_gsd_m");
  positive(cam.near_m, "camera.near_m");
  if (cam.far_m && !(*cam.far_m > cam.near_m)) throw ConfigError("camera.far_m: must be > camera.near_m");
  if (cam.width_px < 0 || cam.height_px < 0) throw ConfigError("camera.width_px/height_px: must be >= 0 (0 = auto)");
  if (cam.cx && (cam.width_px == 0 || !(*cam.cx >= 0.0 && *cam.cx < cam.width_px))) {
    throw ConfigError("camera.cx: needs an explicit width_px and must lie in [0, width_px)");
  }
  if (cam.cy && (cam.height_px == 0 || !(*cam.cy >= 0.0 && *cam.cy < cam.height_px))) {
    throw ConfigError("camera.cy: needs an explicit height_px and must lie in [0, height_px)");
  }
  if (cam.mode == CameraMode::KSP && !cam.sensor_pos) {
    throw ConfigError("camera.sensor_pos: required when camera.mode = ksp");
  }
  try {
    c.render.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("render: ") + e.what());
  }
  if (c.render_threads < 1) throw ConfigError("render.threads: must be >= 1");
  if (c.tiling.tile_px < 32) throw ConfigError("tiling.tile_px: must be >= 32");
  if (c.tiling.overlap_px < 0 || c.tiling.overlap_px >= c.tiling.tile_px) {
    throw ConfigError("tiling.overlap_px: must be in [0, tile_px)");
  }
  if (!(c.tiling.iou_threshold >= 0.0 && c.tiling.iou_threshold <= 1.0)) {
    throw ConfigError("tiling.iou_threshold: must be in [0, 1]");
  }
  const auto& seg = c.segmentation;
  if (seg.backend == Backend::External && seg.external_dir.empty()) {
    throw ConfigError("segmentation.external_dir: required when segmentation.backend = external");
  }
  if (!(seg.baseline.groove_k >= 0.0)) throw ConfigError("segmentation.groove_k: must be >= 0");
  if (!(seg.baseline.contrast_floor >= 0.0 && seg.baseline.contrast_floor <= 1.0)) {
    throw ConfigError("segmentation.contrast_floor: must be in [0, 1]");
  }
  if (!(seg.min_confidence >= 0.0 && seg.min_confidence <= 1.0)) {
    throw ConfigError("segmentation.min_confidence: must be in [0, 1]");
  }
  if (c.output_dir.empty()) throw ConfigError("output.dir: required");
}

/**
 * @brief Builds a config from INI text (may be empty) and `section.key=value`
 * overrides applied in order. Unknown sections or keys are errors.
 */
inline PipelineConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides = {},
                                   const std::string& name = "config") {
  PipelineConfig c;
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(ini_text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(name + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) detail::apply(c, section + "." + key, value.data());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects section.key=value, got '" + o + "'");
    detail::apply(c, o.substr(0, eq), o.substr(eq + 1));
  }
  validate(c);
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  std::string text;
  if (!path.empty()) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError(path.string() + ": config file not found");
    text = detail::read_file(path);
  }
  return parse_config(text, overrides, path.empty() ? "config" : path.string());
}

}  // namespace vcqc

#endif  // VCQC_PIPELINE_CONFIG_HPP
