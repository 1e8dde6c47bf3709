// vcqc - virtual camera quality control for printed filaments
//
// Line plot of a thickness profile (thickness in mm against image column).

#ifndef VCQC_PROFILE_PLOT_HPP
#define VCQC_PROFILE_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "vcqc/geometry/point_cloud.hpp"
#include "vcqc/profile/thickness.hpp"
#include "vcqc/render/image.hpp"

namespace vcqc {

struct PlotStyle {
  int width{800};
  int height{300};
  int margin{24};
};

namespace detail {

inline void put(RgbImage& img, int x, int y, Rgb8 c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::uint8_t* p = img.px(x, y);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

inline void line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb8 c) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) return;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace detail

/**
 * Blue polyline over valid columns (gaps at invalid ones), y axis from 0 to
 * 1.25x the largest value shown. A planned thickness is drawn as a red
 * horizontal line, and light gray lines mark every 5 mm.
 */
inline RgbImage plot_profile(const ThicknessProfile& p, std::optional<double> planned_mm = std::nullopt,
                             const PlotStyle& style = {}) {
  RgbImage img(style.width, style.height);
  std::fill(img.rgb.begin(), img.rgb.end(), std::uint8_t{255});
  const int m = style.margin;
  const int x0 = m, x1 = style.width - m, y0 = style.height - m, y1 = m;
  double top = planned_mm.value_or(0.0);
  for (std::size_t i = 0; i < p.columns(); ++i) {
    if (p.valid[i]) top = std::max(top, p.thickness_mm[i]);
  }
  top = top > 0.0 ? top * 1.25 : 1.0;
  auto sx = [&](std::size_t i) {
    const double n = p.columns() > 1 ? double(p.columns() - 1) : 1.0;
    return x0 + static_cast<int>(std::lround((x1 - x0) * (i / n)));
  };
  auto sy = [&](double v) { return y0 - static_cast<int>(std::lround((y0 - y1) * (v / top))); };

  const Rgb8 grid{220, 220, 220}, axis{0, 0, 0}, trace{31, 119, 180}, plan{214, 39, 40};
  for (double v = 5.0; v < top; v += 5.0) detail::line(img, x0, sy(v), x1, sy(v), grid);
  detail::line(img, x0, y0, x1, y0, axis);
  detail::line(img, x0, y0, x0, y1, axis);
  if (planned_mm) detail::line(img, x0, sy(*planned_mm), x1, sy(*planned_mm), plan);
  for (std::size_t i = 0; i < p.columns(); ++i) {
    if (!p.valid[i]) continue;
    if (i + 1 < p.columns() && p.valid[i + 1]) {
      detail::line(img, sx(i), sy(p.thickness_mm[i]), sx(i + 1), sy(p.thickness_mm[i + 1]), trace);
    } else {
      detail::put(img, sx(i), sy(p.thickness_mm[i]), trace);
    }
  }
  return img;
}

}  // namespace vcqc

#endif  // VCQC_PROFILE_PLOT_HPP
