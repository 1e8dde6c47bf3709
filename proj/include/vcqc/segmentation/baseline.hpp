// vcqc - virtual camera quality control for printed filaments
//
// Classical filament segmentation for rendered tiles. Filaments show up as
// bright horizontal bands separated by darker grooves, so the tile is cut
// into row bands at groove rows and each band is split into connected
// components.

#ifndef VCQC_SEGMENTATION_BASELINE_HPP
#define VCQC_SEGMENTATION_BASELINE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vcqc/segmentation/mask.hpp"

namespace vcqc {

struct BaselineParams {
  double groove_k{1.0};        ///< groove rows lie below mean - k * std of row means
  std::size_t min_area_px{100};
  double contrast_floor{0.05};  ///< bands with lower normalized contrast are dropped
};

/// Luma of an RGB image (ITU-R BT.601 weights).
inline Raster<double> to_gray(const RgbImage& img) {
  Raster<double> g(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      g.at(x, y) = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  return g;
}

/// Validity of an image without an index map: pure black means empty.
inline Bitmap non_black(const RgbImage& img) {
  Bitmap v(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.px(x, y);
      v.at(x, y) = (p[0] | p[1] | p[2]) != 0;
    }
  }
  return v;
}

namespace detail {

// 4-connected components of `on` restricted to rows [y0, y1]; labels in
// raster-scan order of each component's first pixel.
inline std::vector<std::vector<std::size_t>> components(const Bitmap& on, int y0, int y1) {
  const int w = on.width;
  std::vector<int> label(static_cast<std::size_t>(w) * (y1 - y0 + 1), -1);
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::pair<int, int>> stack;
  auto lid = [&](int x, int y) -> int& { return label[static_cast<std::size_t>(y - y0) * w + x]; };
  for (int y = y0; y <= y1; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!on.at(x, y) || lid(x, y) >= 0) continue;
      const int c = static_cast<int>(comps.size());
      comps.emplace_back();
      stack.assign(1, {x, y});
      lid(x, y) = c;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        comps[c].push_back(on.index(cx, cy));
        const int nx[4] = {cx - 1, cx + 1, cx, cx};
        const int ny[4] = {cy, cy, cy - 1, cy + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || nx[k] >= w || ny[k] < y0 || ny[k] > y1) continue;
          if (!on.at(nx[k], ny[k]) || lid(nx[k], ny[k]) >= 0) continue;
          lid(nx[k], ny[k]) = c;
          stack.push_back({nx[k], ny[k]});
        }
      }
    }
  }
  return comps;
}

}  // namespace detail

/**
 * @brief Row-band segmentation of one tile.
 *
 * Row means are taken over valid pixels only. Within every maximal run of
 * rows darker than mean - k*std (over non-empty rows), the darkest row marks
 * a filament boundary and the image is cut there. Each band between cuts is
 * one filament; its confidence is the contrast (band - darkest) / band
 * against the darkest row in or next to it, and bands under the contrast
 * floor are dropped. Each connected component of a band is one instance,
 * unless it is smaller than min_area.
 *
 * `valid` marks non-empty pixels; when absent, non-black pixels are valid.
 */
inline SegmentationResult segment_baseline(const RgbImage& img, const std::string& image_id,
                                           const BaselineParams& params = {},
                                           const std::optional<Bitmap>& valid = std::nullopt) {
  if (img.width < 32 || img.height < 32) {
    throw InvalidArgument("segment_baseline: tile must be at least 32x32");
  }
  const Bitmap on = valid ? *valid : non_black(img);
  if (on.width != img.width || on.height != img.height) {
    throw InvalidArgument("segment_baseline: validity mask size mismatch");
  }
  SegmentationResult res;
  res.image_id = image_id;
  res.width = img.width;
  res.height = img.height;
  res.backend = Backend::Baseline;

  const int w = img.width, h = img.height;
  const Raster<double> gray = to_gray(img);
  std::vector<double> row_mean(h, 0.0);
  std::vector<bool> row_used(h, false);
  double sum = 0.0, sum_sq = 0.0;
  int used = 0;
  for (int y = 0; y < h; ++y) {
    double s = 0.0;
    int n = 0;
    for (int x = 0; x < w; ++x) {
      if (on.at(x, y)) {
        s += gray.at(x, y);
        ++n;
      }
    }
    if (n == 0) continue;
    row_used[y] = true;
    row_mean[y] = s / n;
    sum += row_mean[y];
    sum_sq += row_mean[y] * row_mean[y];
    ++used;
  }
  if (used == 0) return res;

  const double mean = sum / used;
  const double stddev = std::sqrt(std::max(0.0, sum_sq / used - mean * mean));
  const double threshold = mean - params.groove_k * stddev;

  // Rows excluded from every band, and band cuts between row y and y + 1.
  std::vector<std::uint8_t> separator(h, 0), cut_after(h, 0);
  for (int y = 0; y < h;) {
    if (!(row_used[y] && row_mean[y] < threshold)) {
      ++y;
      continue;
    }
    int e = y;
    double lo = row_mean[y];
    while (e + 1 < h && row_used[e + 1] && row_mean[e + 1] < threshold) {
      ++e;
      lo = std::min(lo, row_mean[e]);
    }
    std::vector<int> minima;
    for (int k = y; k <= e; ++k) {
      if (row_mean[k] == lo) minima.push_back(k);
    }
    y = e + 1;

    if (minima.size() == 1) {
      // The boundary runs between the groove row and its darker neighbor, so
      // the groove row belongs to the band on its brighter side.
      const int g = minima[0];
      const bool up = g > 0 && row_used[g - 1];
      const bool down = g + 1 < h && row_used[g + 1];
      if (up && down) {
        if (row_mean[g - 1] > row_mean[g + 1]) {
          cut_after[g] = 1;
        } else if (row_mean[g - 1] < row_mean[g + 1]) {
          cut_after[g - 1] = 1;
        } else {
          separator[g] = 1;
        }
      }
    } else if (minima.size() == 2 && minima[1] == minima[0] + 1) {
      cut_after[minima[0]] = 1;
    } else {
      for (int k : minima) separator[k] = 1;
    }
  }

  struct Band {
    int y0, y1;
    double contrast;
  };
  std::vector<Band> bands;
  for (int y = 0; y < h;) {
    if (!row_used[y] || separator[y]) {
      ++y;
      continue;
    }
    int e = y;
    while (!cut_after[e] && e + 1 < h && row_used[e + 1] && !separator[e + 1]) ++e;
    const int y0 = y, y1 = e;
    y = e + 1;

    // Contrast against the darkest row in or right next to the band.
    double band = 0.0, darkest = row_mean[y0];
    for (int k = y0; k <= y1; ++k) {
      band += row_mean[k];
      darkest = std::min(darkest, row_mean[k]);
    }
    band /= (y1 - y0 + 1);
    if (y0 > 0 && row_used[y0 - 1]) darkest = std::min(darkest, row_mean[y0 - 1]);
    if (y1 + 1 < h && row_used[y1 + 1]) darkest = std::min(darkest, row_mean[y1 + 1]);
    const double contrast = band > 0.0 ? std::clamp((band - darkest) / band, 0.0, 1.0) : 0.0;
    bands.push_back({y0, y1, contrast});
  }

  std::uint32_t next_id = 1;
  for (const Band& band : bands) {
    const double contrast = band.contrast;
    if (contrast < params.contrast_floor) continue;
    for (const auto& comp : detail::components(on, band.y0, band.y1)) {
      if (comp.size() < params.min_area_px) continue;
      InstanceMask m;
      m.id = next_id++;
      m.bits = Bitmap(w, h, 0);
      for (std::size_t k : comp) m.bits.data[k] = 1;
      m.confidence = contrast;
      res.masks.push_back(std::move(m));
    }
  }
  return res;
}

}  // namespace vcqc

#endif  // VCQC_SEGMENTATION_BASELINE_HPP
