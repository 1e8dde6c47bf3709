// vcqc - virtual camera quality control for printed filaments
//
// The pipeline commands. Each stage is a pure function of its inputs plus a
// writer; the file-driven commands reload what earlier stages wrote, and
// run_pipeline chains the stages in memory. Both produce the same bytes.
//
// Output layout under output.dir:
//
//   render/image.png  render/index.vcidx  render/depth.vcdpt  render/camera.json
//   tiles/manifest.json  tiles/tile_NNNN.png
//   masks/tile_NNNN.json
//   instances.json
//   profile/report.json  profile/plot_<id>.png
//   labeled.ply  labels_legend.json
//   timing.json (run only)

#ifndef VCQC_PIPELINE_COMMANDS_HPP
#define VCQC_PIPELINE_COMMANDS_HPP

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcqc/backprojection/label_points.hpp"
#include "vcqc/camera/frustum.hpp"
#include "vcqc/camera/placement.hpp"
#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/pipeline/config.hpp"
#include "vcqc/profile/distance_transform.hpp"
#include "vcqc/profile/plot.hpp"
#include "vcqc/profile/thickness.hpp"
#include "vcqc/render/raster_io.hpp"
#include "vcqc/render/renderer.hpp"
#include "vcqc/segmentation/baseline.hpp"
#include "vcqc/segmentation/interchange.hpp"
#include "vcqc/tiling/manifest.hpp"
#include "vcqc/tiling/merge.hpp"
#include "vcqc/tiling/tile_grid.hpp"

namespace vcqc {

namespace fs = std::filesystem;

struct OutputLayout {
  fs::path root;

  [[nodiscard]] fs::path render_dir() const { return root / "render"; }
  [[nodiscard]] fs::path image() const { return render_dir() / "image.png"; }
  [[nodiscard]] fs::path index_raster() const { return render_dir() / "index.vcidx"; }
  [[nodiscard]] fs::path depth_raster() const { return render_dir() / "depth.vcdpt"; }
  [[nodiscard]] fs::path camera() const { return render_dir() / "camera.json"; }
  [[nodiscard]] fs::path tiles_dir() const { return root / "tiles"; }
  [[nodiscard]] fs::path manifest() const { return tiles_dir() / "manifest.json"; }
  [[nodiscard]] fs::path masks_dir() const { return root / "masks"; }
  [[nodiscard]] fs::path mask_file(int tile) const { return masks_dir() / (tile_stem(tile) + ".json"); }
  [[nodiscard]] fs::path instances() const { return root / "instances.json"; }
  [[nodiscard]] fs::path profile_dir() const { return root / "profile"; }
  [[nodiscard]] fs::path report() const { return profile_dir() / "report.json"; }
  [[nodiscard]] fs::path plot(std::uint32_t id) const {
    return profile_dir() / ("plot_" + std::to_string(id) + ".png");
  }
  [[nodiscard]] fs::path labeled() const { return root / "labeled.ply"; }
  [[nodiscard]] fs::path legend() const { return root / "labels_legend.json"; }
  [[nodiscard]] fs::path timing() const { return root / "timing.json"; }
};

// =============================================================================
// Camera
// =============================================================================

struct CameraSetup {
  Intrinsics intrinsics;
  Pose pose;
  double gsd_m{0.0};
  double working_distance_m{0.0};
  double near_m{0.0};
  double far_m{0.0};
};

/**
 * @brief Places the camera and fixes the image size.
 *
 * The working distance follows from the target GSD. An automatic width or
 * height covers the projection of every point between the near and far
 * planes, centered on the principal point, rounded up to whole tiles.
 */
inline CameraSetup setup_camera(const PipelineConfig& cfg, const PointCloud& cloud) {
  if (cloud.empty()) throw DataError(cfg.input.string() + ": point cloud is empty");
  const CameraConfig& c = cfg.camera;
  CameraSetup s;
  s.working_distance_m = working_distance(c.target_gsd_m, c.pixel_size_mm, c.focal_mm);
  s.gsd_m = gsd(s.working_distance_m, c.pixel_size_mm, c.focal_mm);
  s.near_m = c.near_m;
  s.far_m = c.far_m.value_or(4.0 * s.working_distance_m);
  if (!(s.far_m > s.near_m)) throw ConfigError("camera.far_m: default 4 x working distance is not beyond near_m");

  const Intrinsics probe = Intrinsics::centered(c.focal_mm, c.pixel_size_mm, 1, 1);
  try {
    if (c.mode == CameraMode::PP) {
      s.pose = place_pp(compute_aabb(cloud), c.side, probe, s.working_distance_m);
    } else {
      s.pose = place_ksp(*c.sensor_pos, compute_centroid(cloud), c.ksp_mode, s.working_distance_m);
    }
  } catch (const InvalidArgument& e) {
    throw DataError(cfg.input.string() + ": " + e.what());
  }

  int w = c.width_px, h = c.height_px;
  if (w == 0 || h == 0) {
    const double f = probe.focal_px();
    double du = -1.0, dv = -1.0;
    for (const Vec3& p : cloud.points()) {
      const Vec3 q = s.pose.to_camera(p);
      if (!(q.z() >= s.near_m && q.z() <= s.far_m)) continue;
      du = std::max(du, std::abs(f * q.x() / q.z()));
      dv = std::max(dv, std::abs(f * q.y() / q.z()));
    }
    if (du < 0.0) throw DataError(cfg.input.string() + ": no points between the near and far planes");
    const int tile = cfg.tiling.tile_px;
    auto cover = [tile](double half) {
      return tile * std::max(1, static_cast<int>(std::ceil((2.0 * half + 1.0) / tile)));
    };
    if (w == 0) w = cover(du);
    if (h == 0) h = cover(dv);
  }
  s.intrinsics = Intrinsics{c.focal_mm, c.pixel_size_mm, w, h, c.cx.value_or(w / 2.0), c.cy.value_or(h / 2.0)};
  s.intrinsics.validate();
  return s;
}

inline std::string encode_camera(const CameraSetup& s, const PipelineConfig& cfg, std::size_t total_points,
                                 std::size_t clipped_points) {
  auto row3 = [](const Mat3& m, int r) { return nlohmann::ordered_json{m(r, 0), m(r, 1), m(r, 2)}; };
  auto vec3 = [](const Vec3& v) { return nlohmann::ordered_json{v.x(), v.y(), v.z()}; };
  const Intrinsics& k = s.intrinsics;
  nlohmann::ordered_json j;
  j["format"] = "vcqc-camera/1";
  j["mode"] = cfg.camera.mode == CameraMode::PP ? "pp" : "ksp";
  j["focal_mm"] = k.focal_mm;
  j["pixel_size_mm"] = k.pixel_size_mm;
  j["width_px"] = k.width_px;
  j["height_px"] = k.height_px;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  const Mat3 K = k.K();
  j["K"] = {row3(K, 0), row3(K, 1), row3(K, 2)};
  j["rotation"] = {row3(s.pose.rotation, 0), row3(s.pose.rotation, 1), row3(s.pose.rotation, 2)};
  j["translation"] = vec3(s.pose.translation);
  j["center"] = vec3(s.pose.center());
  j["gsd_m"] = s.gsd_m;
  j["working_distance_m"] = s.working_distance_m;
  j["near_m"] = s.near_m;
  j["far_m"] = s.far_m;
  j["points_total"] = total_points;
  j["points_in_frustum"] = clipped_points;
  return j.dump(2) + "\n";
}

// =============================================================================
// Render
// =============================================================================

struct RenderStage {
  CameraSetup camera;
  std::size_t points_total{0};
  std::size_t points_in_frustum{0};
  RenderBuffer buffer;
  TileManifest manifest;
  std::vector<RgbImage> tiles;  ///< in manifest order
};

inline RenderStage run_render(const PipelineConfig& cfg, const PointCloud& cloud, const std::string& image_id) {
  RenderStage r;
  r.camera = setup_camera(cfg, cloud);
  const auto idx = clip(cloud, build_frustum(r.camera.pose, r.camera.intrinsics, r.camera.near_m, r.camera.far_m));
  r.points_total = cloud.size();
  r.points_in_frustum = idx.size();
  r.buffer = render(cloud, idx, r.camera.pose, r.camera.intrinsics, cfg.render, cfg.render_threads);
  r.buffer.gsd_m = r.camera.gsd_m;
  const TileGrid grid =
      make_tile_grid(r.buffer.width(), r.buffer.height(), cfg.tiling.tile_px, cfg.tiling.overlap_px);
  r.manifest = make_manifest(grid, image_id, r.camera.gsd_m);
  for (const TileRect& t : grid.tiles) r.tiles.push_back(r.buffer.color.crop(t.x0, t.y0, t.width, t.height));
  return r;
}

inline void write_render(const OutputLayout& out, const PipelineConfig& cfg, const RenderStage& r) {
  fs::create_directories(out.render_dir());
  fs::create_directories(out.tiles_dir());
  write_png(out.image(), r.buffer.color);
  write_index_raster(out.index_raster(), r.buffer.index_map);
  write_depth_raster(out.depth_raster(), r.buffer.depth);
  write_file(out.camera(), encode_camera(r.camera, cfg, r.points_total, r.points_in_frustum));
  write_manifest(out.manifest(), r.manifest);
  for (std::size_t i = 0; i < r.tiles.size(); ++i) {
    write_png(out.tiles_dir() / r.manifest.tiles[i].file, r.tiles[i]);
  }
}

// =============================================================================
// Segment
// =============================================================================

inline Bitmap valid_pixels(const Raster<std::uint32_t>& index_map, const TileRect& t) {
  Bitmap v(t.width, t.height, 0);
  for (int y = 0; y < t.height; ++y) {
    for (int x = 0; x < t.width; ++x) v.at(x, y) = index_map.at(t.x0 + x, t.y0 + y) != kEmptyIndex;
  }
  return v;
}

/// Tile mask files must describe exactly the manifest tile they answer.
inline SegmentationResult load_tile_masks(const fs::path& path, const ManifestEntry& tile) {
  if (!fs::is_regular_file(path)) throw DataError(path.string() + ": mask file missing for " + tile.file);
  SegmentationResult r = import_masks(path);
  if (r.frame.global || r.frame.x0 != tile.rect.x0 || r.frame.y0 != tile.rect.y0) {
    throw DataError(path.string() + ": frame must be 'tile' with origin [" + std::to_string(tile.rect.x0) + ", " +
                    std::to_string(tile.rect.y0) + "]");
  }
  if (r.width != tile.rect.width || r.height != tile.rect.height) {
    throw DataError(path.string() + ": size " + std::to_string(r.width) + "x" + std::to_string(r.height) +
                    " does not match tile " + std::to_string(tile.rect.width) + "x" +
                    std::to_string(tile.rect.height));
  }
  return r;
}

/**
 * @brief Per-tile masks in tile frames, filtered by min area and confidence.
 *
 * `tile_image(i)` supplies tile i (baseline only); validity comes from the
 * index raster so black-but-real pixels still count.
 */
inline std::vector<SegmentationResult> run_segment(const PipelineConfig& cfg, const TileManifest& manifest,
                                                   const Raster<std::uint32_t>& index_map,
                                                   const std::function<RgbImage(std::size_t)>& tile_image) {
  if (index_map.width != manifest.width || index_map.height != manifest.height) {
    throw DataError("index raster size does not match the tile manifest");
  }
  const auto& seg = cfg.segmentation;
  std::vector<SegmentationResult> out;
  for (std::size_t i = 0; i < manifest.tiles.size(); ++i) {
    const ManifestEntry& t = manifest.tiles[i];
    SegmentationResult r;
    if (seg.backend == Backend::Baseline) {
      const RgbImage img = tile_image(i);
      if (img.width != t.rect.width || img.height != t.rect.height) {
        throw DataError(t.file + ": tile image size does not match the manifest");
      }
      r = segment_baseline(img, fs::path(t.file).stem().string(), seg.baseline, valid_pixels(index_map, t.rect));
      r.frame = MaskFrame::tile(t.rect.x0, t.rect.y0);
      for (auto& m : r.masks) m.frame = r.frame;
    } else {
      r = load_tile_masks(seg.external_dir / (fs::path(t.file).stem().string() + ".json"), t);
    }
    out.push_back(filter_masks(r, seg.baseline.min_area_px, seg.min_confidence));
  }
  return out;
}

inline void write_segment(const OutputLayout& out, const std::vector<SegmentationResult>& masks) {
  fs::create_directories(out.masks_dir());
  for (std::size_t i = 0; i < masks.size(); ++i) export_masks(masks[i], out.mask_file(static_cast<int>(i)));
}

inline std::vector<SegmentationResult> read_segment(const OutputLayout& out, const TileManifest& manifest) {
  std::vector<SegmentationResult> masks;
  for (std::size_t i = 0; i < manifest.tiles.size(); ++i) {
    masks.push_back(load_tile_masks(out.mask_file(static_cast<int>(i)), manifest.tiles[i]));
  }
  return masks;
}

// =============================================================================
// Merge
// =============================================================================

inline std::vector<GlobalInstance> run_merge(const PipelineConfig& cfg, const TileManifest& manifest,
                                             const std::vector<SegmentationResult>& masks) {
  const TileGrid grid = manifest.grid();
  std::vector<InstanceMask> all;
  for (const auto& r : masks) all.insert(all.end(), r.masks.begin(), r.masks.end());
  const auto global = reattach(grid, all);
  return merge_instances(grid, global, cfg.tiling.iou_threshold);
}

inline std::string encode_instances(const TileManifest& manifest, Backend backend,
                                    const std::vector<GlobalInstance>& instances) {
  SegmentationResult r;
  r.image_id = manifest.image_id;
  r.width = manifest.width;
  r.height = manifest.height;
  r.backend = backend;
  MemberTiles members;
  for (const auto& inst : instances) {
    r.masks.push_back({inst.id, inst.mask.to_frame(manifest.width, manifest.height), inst.confidence, MaskFrame{}});
    members[inst.id] = inst.member_tiles;
  }
  return encode_masks(r, &members);
}

inline std::vector<GlobalInstance> read_instances(const fs::path& path, const TileManifest& manifest) {
  MemberTiles members;
  const SegmentationResult r = import_masks(path, &members);
  if (!r.frame.global) throw DataError(path.string() + ": instances must be in the global frame");
  if (r.width != manifest.width || r.height != manifest.height) {
    throw DataError(path.string() + ": size does not match the tile manifest");
  }
  std::vector<GlobalInstance> out;
  for (const auto& m : r.masks) {
    if (m.id == kUnlabeled) throw DataError(path.string() + ": mask id 0: instance ids start at 1");
    out.push_back({m.id, tight_region(m.bits, 0, 0), m.confidence, members[m.id]});
  }
  return out;
}

// =============================================================================
// Profile
// =============================================================================

/// Planned layer thicknesses in mm, bottom layer first, whitespace separated;
/// `#` starts a comment.
inline std::vector<double> parse_plan(const std::string& text, const std::string& ctx) {
  std::vector<double> plan;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto tok : detail::split_ws(line)) {
      double v = 0.0;
      if (!detail::parse_double(tok, v) || !(v > 0.0)) {
        throw DataError(ctx + ":" + std::to_string(line_no) + ": expected a positive thickness, got '" +
                        std::string(tok) + "'");
      }
      plan.push_back(v);
    }
  }
  return plan;
}

struct ProfileStage {
  std::vector<MeasuredInstance> measured;
  std::vector<double> confidence;
  std::optional<std::vector<double>> plan_mm;
  std::optional<PlanComparison> plan;
};

inline MeasuredInstance measure(const GlobalInstance& inst, ProfileMode mode, double gsd_m) {
  MeasuredInstance m;
  m.id = inst.id;
  m.profile = column_profile(distance_transform(inst.mask.bits, inst.id), mode, gsd_m, inst.mask.x0);
  const Bitmap& b = inst.mask.bits;
  double rows = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < b.height; ++y) {
    for (int x = 0; x < b.width; ++x) {
      if (!b.at(x, y)) continue;
      rows += inst.mask.y0 + y;
      ++n;
    }
  }
  m.mean_row = n ? rows / static_cast<double>(n) : 0.0;
  m.row_min = inst.mask.y0;
  m.row_max = inst.mask.y0 + b.height - 1;
  return m;
}

inline ProfileStage run_profile(const PipelineConfig& cfg, double gsd_m, const std::vector<GlobalInstance>& instances,
                                std::optional<std::vector<double>> plan_mm) {
  ProfileStage p;
  for (const auto& inst : instances) {
    p.measured.push_back(measure(inst, cfg.profile.mode, gsd_m));
    p.confidence.push_back(inst.confidence);
  }
  if (plan_mm) {
    try {
      p.plan = compare_to_plan(p.measured, *plan_mm);
    } catch (const InvalidArgument& e) {
      throw DataError(cfg.profile.plan.string() + ": " + e.what());
    }
    p.plan_mm = std::move(plan_mm);
  }
  return p;
}

inline std::string encode_profile_report(const ProfileStage& p, const TileManifest& manifest, ProfileMode mode) {
  nlohmann::ordered_json j;
  j["format"] = "vcqc-profile/1";
  j["image_id"] = manifest.image_id;
  j["mode"] = to_string(mode);
  j["gsd_m"] = manifest.gsd_m;
  j["instances"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < p.measured.size(); ++i) {
    const auto& m = p.measured[i];
    const auto& pr = m.profile;
    nlohmann::ordered_json ji;
    ji["id"] = m.id;
    ji["confidence"] = p.confidence[i];
    ji["rows"] = {m.row_min, m.row_max};
    ji["mean_row"] = m.mean_row;
    ji["first_column"] = pr.first_column;
    ji["stats"] = {{"columns", pr.stats.count},
                   {"mean_mm", pr.stats.mean},
                   {"min_mm", pr.stats.min},
                   {"max_mm", pr.stats.max},
                   {"std_mm", pr.stats.stddev}};
    auto& col = ji["thickness_mm"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < pr.columns(); ++c) {
      col.push_back(pr.valid[c] ? nlohmann::ordered_json(pr.thickness_mm[c]) : nlohmann::ordered_json());
    }
    j["instances"].push_back(std::move(ji));
  }
  if (p.plan) {
    nlohmann::ordered_json jp;
    jp["overlap_warning"] = p.plan->overlap_warning;
    jp["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : p.plan->entries) {
      jp["entries"].push_back({{"layer", e.layer},
                               {"instance_id", e.instance_id},
                               {"planned_mm", e.planned_mm},
                               {"measured_mm", e.measured_mm},
                               {"deviation_mm", e.deviation_mm}});
    }
    j["plan"] = std::move(jp);
  } else {
    j["plan"] = nullptr;
  }
  return j.dump(2) + "\n";
}

inline void write_profile(const OutputLayout& out, const ProfileStage& p, const TileManifest& manifest,
                          ProfileMode mode) {
  fs::create_directories(out.profile_dir());
  write_file(out.report(), encode_profile_report(p, manifest, mode));
  for (const auto& m : p.measured) {
    std::optional<double> planned;
    if (p.plan) {
      for (const auto& e : p.plan->entries) {
        if (e.instance_id == m.id) planned = e.planned_mm;
      }
    }
    write_png(out.plot(m.id), plot_profile(m.profile, planned));
  }
}

// =============================================================================
// Back-projection
// =============================================================================

inline LabeledCloud run_backproject(const PointCloud& cloud, const Raster<std::uint32_t>& index_map,
                                    const std::vector<GlobalInstance>& instances, const std::string& image_id) {
  for (std::uint32_t v : index_map.data) {
    if (v != kEmptyIndex && v >= cloud.size()) {
      throw DataError("index raster refers to point " + std::to_string(v) + " but the cloud has " +
                      std::to_string(cloud.size()) + " points");
    }
  }
  return label_points(cloud, index_map, instances, image_id);
}

inline void write_backproject(const OutputLayout& out, const LabeledCloud& labeled,
                              const std::vector<GlobalInstance>& instances) {
  fs::create_directories(out.root);
  export_labeled(labeled, out.labeled());
  write_file(out.legend(), encode_label_legend(instances, labeled.render_id));
}

// =============================================================================
// Commands
// =============================================================================

enum class Command { Render, Segment, Merge, Profile, Backproject, Run };

/// Paths the command reads from outside output.dir must exist.
inline void check_inputs(const PipelineConfig& cfg, Command cmd) {
  const bool needs_cloud = cmd == Command::Render || cmd == Command::Backproject || cmd == Command::Run;
  if (needs_cloud) {
    if (cfg.input.empty()) throw ConfigError("input.path: required");
    if (!fs::is_regular_file(cfg.input)) throw ConfigError(cfg.input.string() + ": input cloud not found");
  }
  if ((cmd == Command::Segment || cmd == Command::Run) && cfg.segmentation.backend == Backend::External &&
      !fs::is_directory(cfg.segmentation.external_dir)) {
    throw ConfigError(cfg.segmentation.external_dir.string() + ": external mask directory not found");
  }
  if ((cmd == Command::Profile || cmd == Command::Run) && !cfg.profile.plan.empty() &&
      !fs::is_regular_file(cfg.profile.plan)) {
    throw ConfigError(cfg.profile.plan.string() + ": plan file not found");
  }
}

inline std::string image_id_of(const PipelineConfig& cfg) { return cfg.input.stem().string(); }

inline std::optional<std::vector<double>> load_plan(const PipelineConfig& cfg) {
  if (cfg.profile.plan.empty()) return std::nullopt;
  return parse_plan(detail::read_file(cfg.profile.plan), cfg.profile.plan.string());
}

inline PointCloud load_input(const PipelineConfig& cfg) {
  try {
    return load_point_cloud(cfg.input, cfg.input_format);
  } catch (const InvalidArgument& e) {
    throw DataError(cfg.input.string() + ": " + e.what());
  }
}

inline void cmd_render(const PipelineConfig& cfg) {
  check_inputs(cfg, Command::Render);
  const PointCloud cloud = load_input(cfg);
  write_render(OutputLayout{cfg.output_dir}, cfg, run_render(cfg, cloud, image_id_of(cfg)));
}

inline void cmd_segment(const PipelineConfig& cfg) {
  check_inputs(cfg, Command::Segment);
  const OutputLayout out{cfg.output_dir};
  const TileManifest manifest = read_manifest(out.manifest());
  const auto index_map = read_index_raster(out.index_raster());
  const auto masks = run_segment(cfg, manifest, index_map, [&](std::size_t i) {
    return read_png(out.tiles_dir() / manifest.tiles[i].file);
  });
  write_segment(out, masks);
}

inline void cmd_merge(const PipelineConfig& cfg) {
  check_inputs(cfg, Command::Merge);
  const OutputLayout out{cfg.output_dir};
  const TileManifest manifest = read_manifest(out.manifest());
  const auto instances = run_merge(cfg, manifest, read_segment(out, manifest));
  write_file(out.instances(), encode_instances(manifest, cfg.segmentation.backend, instances));
}

inline void cmd_profile(const PipelineConfig& cfg) {
  check_inputs(cfg, Command::Profile);
  const OutputLayout out{cfg.output_dir};
  const TileManifest manifest = read_manifest(out.manifest());
  const auto instances = read_instances(out.instances(), manifest);
  const auto p = run_profile(cfg, manifest.gsd_m, instances, load_plan(cfg));
  write_profile(out, p, manifest, cfg.profile.mode);
}

inline void cmd_backproject(const PipelineConfig& cfg) {
  check_inputs(cfg, Command::Backproject);
  const OutputLayout out{cfg.output_dir};
  const TileManifest manifest = read_manifest(out.manifest());
  const auto instances = read_instances(out.instances(), manifest);
  const auto index_map = read_index_raster(out.index_raster());
  const PointCloud cloud = load_input(cfg);
  write_backproject(out, run_backproject(cloud, index_map, instances, manifest.image_id), instances);
}

struct StageTiming {
  double pre_ms{0.0};
  double segmentation_ms{0.0};
  double post_ms{0.0};
  double io_ms{0.0};
  std::size_t tiles{0};

  [[nodiscard]] double total_ms() const { return pre_ms + segmentation_ms + post_ms; }
  [[nodiscard]] double fps() const { return total_ms() > 0.0 ? 1000.0 / total_ms() : 0.0; }
  [[nodiscard]] double pre_post_per_tile_ms() const { return tiles ? (pre_ms + post_ms) / tiles : 0.0; }
};

inline std::string encode_timing(const StageTiming& t, const std::string& image_id) {
  nlohmann::ordered_json j;
  j["format"] = "vcqc-timing/1";
  j["image_id"] = image_id;
  j["tiles"] = t.tiles;
  j["stages"] = nlohmann::ordered_json::array();
  j["stages"].push_back({{"stage", "pre_processing"}, {"ms", t.pre_ms}});
  j["stages"].push_back({{"stage", "segmentation"}, {"ms", t.segmentation_ms}});
  j["stages"].push_back({{"stage", "post_processing"}, {"ms", t.post_ms}});
  j["stages"].push_back({{"stage", "total"}, {"ms", t.total_ms()}});
  j["fps"] = t.fps();
  j["pre_post_per_tile_ms"] = t.pre_post_per_tile_ms();
  j["io_ms"] = t.io_ms;
  return j.dump(2) + "\n";
}

/**
 * @brief All stages in memory, writing the same artifacts as the individual
 * commands plus timing.json.
 *
 * Pre-processing is camera setup, clipping, rendering and tiling;
 * post-processing is merging, distance transforms, profiling and labeling.
 * File reads and writes are timed apart as io_ms and are not in the total.
 */
inline StageTiming run_pipeline(const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  check_inputs(cfg, Command::Run);
  const OutputLayout out{cfg.output_dir};
  StageTiming t;

  auto t0 = clock::now();
  const PointCloud cloud = load_input(cfg);
  const auto plan = load_plan(cfg);
  auto t1 = clock::now();
  t.io_ms += ms(t0, t1);

  const RenderStage r = run_render(cfg, cloud, image_id_of(cfg));
  auto t2 = clock::now();
  t.pre_ms = ms(t1, t2);
  t.tiles = r.tiles.size();

  const auto masks = run_segment(cfg, r.manifest, r.buffer.index_map, [&](std::size_t i) { return r.tiles[i]; });
  auto t3 = clock::now();
  t.segmentation_ms = ms(t2, t3);

  const auto instances = run_merge(cfg, r.manifest, masks);
  const auto profile = run_profile(cfg, r.manifest.gsd_m, instances, plan);
  const auto labeled = run_backproject(cloud, r.buffer.index_map, instances, r.manifest.image_id);
  auto t4 = clock::now();
  t.post_ms = ms(t3, t4);

  write_render(out, cfg, r);
  write_segment(out, masks);
  write_file(out.instances(), encode_instances(r.manifest, cfg.segmentation.backend, instances));
  write_profile(out, profile, r.manifest, cfg.profile.mode);
  write_backproject(out, labeled, instances);
  auto t5 = clock::now();
  t.io_ms += ms(t4, t5);
  write_file(out.timing(), encode_timing(t, r.manifest.image_id));
  return t;
}

}  // namespace vcqc

#endif  // VCQC_PIPELINE_COMMANDS_HPP
