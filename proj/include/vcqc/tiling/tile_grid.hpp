// vcqc - virtual camera quality control for printed filaments
//
// Sliding-window decomposition of a large render into fixed-size tiles.
// Tiles step by (tile - overlap); the last row/column of tiles is anchored
// flush to the image edge so no padding pixels are invented.

#ifndef VCQC_TILING_TILE_GRID_HPP
#define VCQC_TILING_TILE_GRID_HPP

#include <algorithm>
#include <vector>

#include "vcqc/error.hpp"
#include "vcqc/render/image.hpp"

namespace vcqc {

struct TileRect {
  int x0{0};
  int y0{0};
  int width{0};
  int height{0};

  [[nodiscard]] int x1() const { return x0 + width; }
  [[nodiscard]] int y1() const { return y0 + height; }
  [[nodiscard]] bool contains(int x, int y) const { return x >= x0 && y >= y0 && x < x1() && y < y1(); }
  [[nodiscard]] bool empty() const { return width <= 0 || height <= 0; }
  friend bool operator==(const TileRect&, const TileRect&) = default;
};

inline TileRect intersect(const TileRect& a, const TileRect& b) {
  const int x0 = std::max(a.x0, b.x0), y0 = std::max(a.y0, b.y0);
  const int x1 = std::min(a.x1(), b.x1()), y1 = std::min(a.y1(), b.y1());
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

struct TileGrid {
  int image_width{0};
  int image_height{0};
  int tile_px{512};
  int overlap_px{64};
  std::vector<TileRect> tiles;  ///< row-major: y0 then x0

  /// Index of the tile anchored at (x0, y0), or -1.
  [[nodiscard]] int find(int x0, int y0) const {
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      if (tiles[i].x0 == x0 && tiles[i].y0 == y0) return static_cast<int>(i);
    }
    return -1;
  }
};

namespace detail {

inline std::vector<int> axis_anchors(int extent, int tile, int stride) {
  if (extent <= tile) return {0};
  std::vector<int> a;
  for (int p = 0; p <= extent - tile; p += stride) a.push_back(p);
  if (a.back() != extent - tile) a.push_back(extent - tile);
  return a;
}

}  // namespace detail

inline TileGrid make_tile_grid(int width, int height, int tile_px = 512, int overlap_px = 64) {
  if (width < 1 || height < 1) throw InvalidArgument("make_tile_grid: image must be >= 1x1");
  if (tile_px < 1 || overlap_px < 0 || overlap_px >= tile_px) {
    throw InvalidArgument("make_tile_grid: need tile_px >= 1 and 0 <= overlap_px < tile_px");
  }
  TileGrid g{width, height, tile_px, overlap_px, {}};
  const int stride = tile_px - overlap_px;
  for (int y : detail::axis_anchors(height, tile_px, stride)) {
    for (int x : detail::axis_anchors(width, tile_px, stride)) {
      g.tiles.push_back({x, y, std::min(tile_px, width), std::min(tile_px, height)});
    }
  }
  return g;
}

struct Tile {
  TileRect rect;
  RgbImage image;
};

inline std::vector<Tile> tile(const RgbImage& image, int tile_px = 512, int overlap_px = 64) {
  const TileGrid grid = make_tile_grid(image.width, image.height, tile_px, overlap_px);
  std::vector<Tile> out;
  out.reserve(grid.tiles.size());
  for (const TileRect& r : grid.tiles) {
    out.push_back({r, image.crop(r.x0, r.y0, r.width, r.height)});
  }
  return out;
}

}  // namespace vcqc

#endif  // VCQC_TILING_TILE_GRID_HPP
