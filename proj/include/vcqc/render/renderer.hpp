// vcqc - virtual camera quality control for printed filaments
//
// Z-buffered point splatting into a color image plus depth and source-index
// rasters. The index raster is what makes back-projection of 2D labels
// possible: every non-empty pixel names the point that won it.

#ifndef VCQC_RENDER_RENDERER_HPP
#define VCQC_RENDER_RENDERER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vcqc/camera/camera.hpp"
#include "vcqc/render/image.hpp"

namespace vcqc {

inline constexpr std::uint32_t kEmptyIndex = 0xFFFFFFFFu;

enum class HoleFill { None, Close3 };

inline HoleFill parse_hole_fill(std::string_view s) {
  if (s == "none") return HoleFill::None;
  if (s == "close3") return HoleFill::Close3;
  throw InvalidArgument("unknown hole_fill '" + std::string(s) + "'");
}

struct SplatConfig {
  int radius_px{1};
  double colormap_range_m{0.005};  ///< symmetric +/- range for signed distance
  HoleFill hole_fill{HoleFill::None};

  void validate() const {
    if (radius_px < 0 || radius_px > 8) {
      throw InvalidArgument("SplatConfig: radius_px must be in [0, 8]");
    }
    if (!(colormap_range_m > 0.0) || !std::isfinite(colormap_range_m)) {
      throw InvalidArgument("SplatConfig: colormap_range_m must be > 0");
    }
  }
};

struct RenderBuffer {
  RgbImage color;
  Raster<double> depth;               ///< +inf where empty
  Raster<std::uint32_t> index_map;    ///< kEmptyIndex where empty
  double gsd_m{0.0};
  Pose pose;
  Intrinsics intrinsics;

  [[nodiscard]] int width() const { return color.width; }
  [[nodiscard]] int height() const { return color.height; }
  [[nodiscard]] bool empty_at(int x, int y) const { return index_map.at(x, y) == kEmptyIndex; }
};

// =============================================================================
// Colorization
// =============================================================================

/// Intensity -> gray; signed distance -> blue-white-red ramp over
/// [-range, +range], clamped.
inline Rgb8 colorize(const ColorAttr& attr, std::size_t i, const SplatConfig& cfg) {
  auto to8 = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  };
  switch (attr.kind) {
    case ColorKind::Rgb8:
      return attr.rgb[i];
    case ColorKind::Intensity: {
      const std::uint8_t g = to8(attr.scalar[i] * 255.0);
      return {g, g, g};
    }
    case ColorKind::SignedDistance: {
      const double t = std::clamp(attr.scalar[i] / cfg.colormap_range_m, -1.0, 1.0);
      if (t >= 0.0) {
        const std::uint8_t fade = to8(255.0 * (1.0 - t));
        return {255, fade, fade};
      }
      const std::uint8_t fade = to8(255.0 * (1.0 + t));
      return {fade, fade, 255};
    }
  }
  return {};
}

// =============================================================================
// Rendering
// =============================================================================

namespace detail {

struct ProjectedPoint {
  std::uint32_t index;
  long px, py;
  double depth;
};

// Nearest wins; equal depth goes to the smaller point index.
inline bool beats(double depth, std::uint32_t index, double cur_depth, std::uint32_t cur_index) {
  return depth < cur_depth || (depth == cur_depth && index < cur_index);
}

inline void splat_rows(std::span<const ProjectedPoint> pts, int radius, int row_begin,
                       int row_end, Raster<double>& depth, Raster<std::uint32_t>& index) {
  for (const auto& p : pts) {
    const long y0 = std::max<long>(p.py - radius, row_begin);
    const long y1 = std::min<long>(p.py + radius, row_end - 1);
    const long x0 = std::max<long>(p.px - radius, 0);
    const long x1 = std::min<long>(p.px + radius, depth.width - 1);
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        const std::size_t k = depth.index(static_cast<int>(x), static_cast<int>(y));
        if (beats(p.depth, p.index, depth.data[k], index.data[k])) {
          depth.data[k] = p.depth;
          index.data[k] = p.index;
        }
      }
    }
  }
}

// 3x3 closing restricted to holes: empty pixels next to a non-empty one take
// the nearest-depth neighbor as donor, then filled pixels that still touch an
// empty pixel of the dilated raster are reverted.
inline void close3(Raster<double>& depth, Raster<std::uint32_t>& index) {
  const int w = depth.width, h = depth.height;
  Raster<double> dd = depth;
  Raster<std::uint32_t> di = index;
  Raster<std::uint8_t> filled(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (index.at(x, y) != kEmptyIndex) continue;
      double best_d = std::numeric_limits<double>::infinity();
      std::uint32_t best_i = kEmptyIndex;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!depth.in_bounds(x + dx, y + dy)) continue;
          const std::uint32_t ni = index.at(x + dx, y + dy);
          if (ni == kEmptyIndex) continue;
          if (beats(depth.at(x + dx, y + dy), ni, best_d, best_i)) {
            best_d = depth.at(x + dx, y + dy);
            best_i = ni;
          }
        }
      }
      if (best_i != kEmptyIndex) {
        dd.at(x, y) = best_d;
        di.at(x, y) = best_i;
        filled.at(x, y) = 1;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!filled.at(x, y)) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (di.in_bounds(x + dx, y + dy) && di.at(x + dx, y + dy) == kEmptyIndex) {
            keep = false;
            break;
          }
        }
      }
      if (keep) {
        depth.at(x, y) = dd.at(x, y);
        index.at(x, y) = di.at(x, y);
      }
    }
  }
}

}  // namespace detail

/**
 * @brief Renders the selected points of `cloud` through the camera.
 *
 * Each point covers a (2r+1)^2 square of pixels around the pixel containing
 * its projection. Per pixel the smallest depth wins, ties go to the smaller
 * point index, so the output does not depend on `threads` (rows are split
 * into bands, one per thread).
 */
inline RenderBuffer render(const PointCloud& cloud, std::span<const std::uint32_t> indices,
                           const Pose& pose, const Intrinsics& intr, const SplatConfig& cfg,
                           int threads = 1) {
  intr.validate();
  cfg.validate();
  const int w = intr.width_px, h = intr.height_px;
  RenderBuffer buf;
  buf.pose = pose;
  buf.intrinsics = intr;
  buf.color = RgbImage(w, h);
  buf.depth = Raster<double>(w, h, std::numeric_limits<double>::infinity());
  buf.index_map = Raster<std::uint32_t>(w, h, kEmptyIndex);

  std::vector<detail::ProjectedPoint> projected;
  projected.reserve(indices.size());
  const long r = cfg.radius_px;
  for (std::uint32_t i : indices) {
    if (i >= cloud.size()) throw InvalidArgument("render: point index out of range");
    const auto pr = project(pose, intr, cloud.point(i));
    if (!pr) continue;
    const long px = pixel_of(pr->u), py = pixel_of(pr->v);
    if (px + r < 0 || py + r < 0 || px - r >= w || py - r >= h) continue;
    projected.push_back({i, px, py, pr->depth});
  }

  threads = std::clamp(threads, 1, std::max(1, h));
  if (threads == 1) {
    detail::splat_rows(projected, cfg.radius_px, 0, h, buf.depth, buf.index_map);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      const int rb = h * t / threads, re = h * (t + 1) / threads;
      pool.emplace_back([&, rb, re] {
        detail::splat_rows(projected, cfg.radius_px, rb, re, buf.depth, buf.index_map);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (cfg.hole_fill == HoleFill::Close3) detail::close3(buf.depth, buf.index_map);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint32_t i = buf.index_map.at(x, y);
      if (i == kEmptyIndex) continue;
      const Rgb8 c = colorize(cloud.colors(), i, cfg);
      std::uint8_t* p = buf.color.px(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
  }
  return buf;
}

}  // namespace vcqc

#endif  // VCQC_RENDER_RENDERER_HPP
