// vcqc - virtual camera quality control for printed filaments
//
// Reattaching per-tile instance masks to the global image frame and merging
// instances that were split across tile borders.

#ifndef VCQC_TILING_MERGE_HPP
#define VCQC_TILING_MERGE_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "vcqc/segmentation/mask.hpp"
#include "vcqc/tiling/tile_grid.hpp"

namespace vcqc {

// =============================================================================
// RegionMask: a bitmap positioned in the global frame (tight bounding box)
// =============================================================================

struct RegionMask {
  int x0{0};
  int y0{0};
  Bitmap bits;

  [[nodiscard]] TileRect bounds() const { return {x0, y0, bits.width, bits.height}; }
  [[nodiscard]] bool test(int x, int y) const {
    return x >= x0 && y >= y0 && x < x0 + bits.width && y < y0 + bits.height &&
           bits.at(x - x0, y - y0) != 0;
  }
  [[nodiscard]] std::size_t area() const { return foreground_area(bits); }
  [[nodiscard]] bool empty() const { return bits.data.empty() || area() == 0; }

  /// Full-frame bitmap of size W x H.
  [[nodiscard]] Bitmap to_frame(int width, int height) const {
    Bitmap out(width, height, 0);
    for (int y = 0; y < bits.height; ++y) {
      for (int x = 0; x < bits.width; ++x) {
        if (bits.at(x, y) && out.in_bounds(x0 + x, y0 + y)) out.at(x0 + x, y0 + y) = 1;
      }
    }
    return out;
  }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;
};

/// Crops `bits` (anchored at ox, oy) to its foreground bounding box.
inline RegionMask tight_region(const Bitmap& bits, int ox, int oy) {
  int xmin = bits.width, ymin = bits.height, xmax = -1, ymax = -1;
  for (int y = 0; y < bits.height; ++y) {
    for (int x = 0; x < bits.width; ++x) {
      if (!bits.at(x, y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax < 0) return {ox, oy, Bitmap{}};
  return {ox + xmin, oy + ymin, bits.crop(xmin, ymin, xmax - xmin + 1, ymax - ymin + 1)};
}

inline RegionMask region_union(const RegionMask& a, const RegionMask& b) {
  if (a.bits.data.empty()) return b;
  if (b.bits.data.empty()) return a;
  const int x0 = std::min(a.x0, b.x0), y0 = std::min(a.y0, b.y0);
  const int x1 = std::max(a.x0 + a.bits.width, b.x0 + b.bits.width);
  const int y1 = std::max(a.y0 + a.bits.height, b.y0 + b.bits.height);
  RegionMask out{x0, y0, Bitmap(x1 - x0, y1 - y0, 0)};
  for (const RegionMask* m : {&a, &b}) {
    for (int y = 0; y < m->bits.height; ++y) {
      for (int x = 0; x < m->bits.width; ++x) {
        if (m->bits.at(x, y)) out.bits.at(m->x0 - x0 + x, m->y0 - y0 + y) = 1;
      }
    }
  }
  return out;
}

// =============================================================================
// Reattach
// =============================================================================

/// A per-tile instance translated into the global frame.
struct GlobalMask {
  std::uint32_t source_id{0};
  int tile{-1};
  double confidence{0.0};
  RegionMask region;
};

/**
 * @brief Translates tile-frame masks by their tile origin.
 *
 * Each mask's frame origin must be a tile anchor of `grid` and the mask must
 * fit inside that tile. Empty masks are skipped. No merging happens here.
 */
inline std::vector<GlobalMask> reattach(const TileGrid& grid, std::span<const InstanceMask> masks) {
  std::vector<GlobalMask> out;
  out.reserve(masks.size());
  for (const auto& m : masks) {
    if (m.frame.global) throw InvalidArgument("reattach: mask " + std::to_string(m.id) + " is not in a tile frame");
    const int t = grid.find(m.frame.x0, m.frame.y0);
    if (t < 0) {
      throw InvalidArgument("reattach: mask " + std::to_string(m.id) + " origin (" +
                            std::to_string(m.frame.x0) + "," + std::to_string(m.frame.y0) +
                            ") is not a tile anchor");
    }
    const TileRect& r = grid.tiles[t];
    if (m.width() > r.width || m.height() > r.height) {
      throw InvalidArgument("reattach: mask " + std::to_string(m.id) + " exceeds its tile bounds");
    }
    RegionMask region = tight_region(m.bits, r.x0, r.y0);
    if (region.bits.data.empty()) continue;
    out.push_back({m.id, t, m.confidence, std::move(region)});
  }
  return out;
}

// =============================================================================
// Merge
// =============================================================================

struct GlobalInstance {
  std::uint32_t id{0};
  RegionMask mask;
  double confidence{0.0};
  std::vector<int> member_tiles;
};

struct OverlapScore {
  std::size_t intersection{0};
  std::size_t uni{0};
  [[nodiscard]] double iou() const { return uni == 0 ? 0.0 : double(intersection) / double(uni); }
};

/// IoU of two masks restricted to `strip`.
inline OverlapScore overlap_score(const RegionMask& a, const RegionMask& b, const TileRect& strip) {
  OverlapScore s;
  const TileRect ra = intersect(a.bounds(), strip), rb = intersect(b.bounds(), strip);
  if (ra.empty() && rb.empty()) return s;
  std::size_t na = 0, nb = 0;
  for (int y = ra.y0; y < ra.y1(); ++y) {
    for (int x = ra.x0; x < ra.x1(); ++x) {
      if (!a.bits.at(x - a.x0, y - a.y0)) continue;
      ++na;
      if (b.test(x, y)) ++s.intersection;
    }
  }
  for (int y = rb.y0; y < rb.y1(); ++y) {
    for (int x = rb.x0; x < rb.x1(); ++x) nb += b.bits.at(x - b.x0, y - b.y0) != 0;
  }
  s.uni = na + nb - s.intersection;
  return s;
}

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/**
 * @brief Merges instances split across tiles.
 *
 * For every pair of masks from different tiles, IoU is computed on the
 * restriction of both masks to the overlap of their two tiles. Pairs with
 * at least one shared pixel there and IoU >= threshold are joined; joins
 * are transitive. An instance's mask is the exact union of its members and
 * its confidence the members' maximum.
 *
 * Instances are numbered from 1 in a canonical order (top, left, bottom,
 * right, area, first member), so the result does not depend on input order.
 */
inline std::vector<GlobalInstance> merge_instances(const TileGrid& grid, std::span<const GlobalMask> masks,
                                                   double iou_threshold = 0.5) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw InvalidArgument("merge_instances: IoU threshold must be in [0,1]");
  }
  const std::size_t n = masks.size();
  for (const auto& m : masks) {
    if (m.tile < 0 || static_cast<std::size_t>(m.tile) >= grid.tiles.size()) {
      throw InvalidArgument("merge_instances: mask refers to unknown tile");
    }
  }
  detail::UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (masks[i].tile == masks[j].tile) continue;
      const TileRect strip = intersect(grid.tiles[masks[i].tile], grid.tiles[masks[j].tile]);
      if (strip.empty()) continue;
      if (intersect(masks[i].region.bounds(), masks[j].region.bounds()).empty()) continue;
      const OverlapScore s = overlap_score(masks[i].region, masks[j].region, strip);
      if (s.intersection > 0 && s.iou() >= iou_threshold) uf.unite(i, j);
    }
  }

  // Members of each group, ordered by (tile, source id).
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> group_of(n, -1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(masks[a].tile, masks[a].source_id, masks[a].region.y0, masks[a].region.x0) <
           std::tie(masks[b].tile, masks[b].source_id, masks[b].region.y0, masks[b].region.x0);
  });
  for (std::size_t i : order) {
    const std::size_t root = uf.find(i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[root]].push_back(i);
  }

  struct Built {
    GlobalInstance inst;
    std::tuple<int, int, int, int, std::size_t, int, std::uint32_t> key;
  };
  std::vector<Built> built;
  for (const auto& g : groups) {
    GlobalInstance inst;
    for (std::size_t i : g) {
      inst.mask = region_union(inst.mask, masks[i].region);
      inst.confidence = std::max(inst.confidence, masks[i].confidence);
      inst.member_tiles.push_back(masks[i].tile);
    }
    std::sort(inst.member_tiles.begin(), inst.member_tiles.end());
    inst.member_tiles.erase(std::unique(inst.member_tiles.begin(), inst.member_tiles.end()),
                            inst.member_tiles.end());
    const TileRect b = inst.mask.bounds();
    const auto& first = masks[g.front()];
    built.push_back({std::move(inst), {b.y0, b.x0, b.y1(), b.x1(), 0, first.tile, first.source_id}});
    std::get<4>(built.back().key) = built.back().inst.mask.area();
  }
  std::sort(built.begin(), built.end(), [](const Built& a, const Built& b) { return a.key < b.key; });
  std::vector<GlobalInstance> out;
  out.reserve(built.size());
  for (auto& b : built) {
    b.inst.id = static_cast<std::uint32_t>(out.size() + 1);
    out.push_back(std::move(b.inst));
  }
  return out;
}

}  // namespace vcqc

#endif  // VCQC_TILING_MERGE_HPP
