// vcqc - virtual camera quality control for printed filaments
//
// Tile manifest: the list of tile images cut from one render, with their
// anchors. External segmentation backends read it and answer with one mask
// interchange file per tile.

#ifndef VCQC_TILING_MANIFEST_HPP
#define VCQC_TILING_MANIFEST_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/tiling/tile_grid.hpp"

namespace vcqc {

inline constexpr const char* kManifestFormat = "vcqc-tiles/1";

struct ManifestEntry {
  int index{0};
  std::string file;  ///< relative to the manifest's directory
  TileRect rect;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct TileManifest {
  std::string image_id;
  int width{0};
  int height{0};
  double gsd_m{0.0};
  int tile_px{512};
  int overlap_px{64};
  std::vector<ManifestEntry> tiles;

  /// Grid implied by the header; tile order follows the manifest.
  [[nodiscard]] TileGrid grid() const {
    TileGrid g{width, height, tile_px, overlap_px, {}};
    for (const auto& t : tiles) g.tiles.push_back(t.rect);
    return g;
  }
  friend bool operator==(const TileManifest&, const TileManifest&) = default;
};

inline std::string tile_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tile_%04d", index);
  return buf;
}

inline TileManifest make_manifest(const TileGrid& grid, std::string image_id, double gsd_m) {
  TileManifest m{std::move(image_id), grid.image_width, grid.image_height, gsd_m, grid.tile_px, grid.overlap_px, {}};
  for (std::size_t i = 0; i < grid.tiles.size(); ++i) {
    const int k = static_cast<int>(i);
    m.tiles.push_back({k, tile_stem(k) + ".png", grid.tiles[i]});
  }
  return m;
}

inline std::string encode_manifest(const TileManifest& m) {
  nlohmann::ordered_json j;
  j["format"] = kManifestFormat;
  j["image_id"] = m.image_id;
  j["width"] = m.width;
  j["height"] = m.height;
  j["gsd_m"] = m.gsd_m;
  j["tile_px"] = m.tile_px;
  j["overlap_px"] = m.overlap_px;
  j["tiles"] = nlohmann::ordered_json::array();
  for (const auto& t : m.tiles) {
    j["tiles"].push_back({{"index", t.index},
                          {"file", t.file},
                          {"origin", {t.rect.x0, t.rect.y0}},
                          {"width", t.rect.width},
                          {"height", t.rect.height}});
  }
  return j.dump(2) + "\n";
}

/**
 * @brief Parses and validates a manifest.
 *
 * Every tile must lie inside the image, be at most tile_px on a side, and be
 * listed with a consecutive index starting at 0. Errors name `ctx`.
 */
inline TileManifest decode_manifest(const std::string& text, const std::string& ctx) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(ctx + ": invalid JSON: " + e.what());
  }
  auto need = [&](const nlohmann::json& o, const char* key) -> const nlohmann::json& {
    if (!o.is_object() || !o.contains(key)) throw DataError(ctx + ": missing field '" + key + "'");
    return o.at(key);
  };
  auto integer = [&](const nlohmann::json& o, const char* key, int lo) {
    const auto& v = need(o, key);
    if (!v.is_number_integer() || v.get<long long>() < lo || v.get<long long>() > 1 << 30) {
      throw DataError(ctx + ": '" + key + "' must be an integer >= " + std::to_string(lo));
    }
    return v.get<int>();
  };
  if (need(j, "format") != kManifestFormat) {
    throw DataError(ctx + ": format must be '" + std::string(kManifestFormat) + "'");
  }
  TileManifest m;
  const auto& id = need(j, "image_id");
  if (!id.is_string()) throw DataError(ctx + ": image_id must be a string");
  m.image_id = id.get<std::string>();
  m.width = integer(j, "width", 1);
  m.height = integer(j, "height", 1);
  const auto& g = need(j, "gsd_m");
  if (!g.is_number() || !(g.get<double>() > 0.0) || !std::isfinite(g.get<double>())) {
    throw DataError(ctx + ": gsd_m must be a positive number");
  }
  m.gsd_m = g.get<double>();
  m.tile_px = integer(j, "tile_px", 1);
  m.overlap_px = integer(j, "overlap_px", 0);
  if (m.overlap_px >= m.tile_px) throw DataError(ctx + ": overlap_px must be < tile_px");
  const auto& tiles = need(j, "tiles");
  if (!tiles.is_array()) throw DataError(ctx + ": tiles must be a list");
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    const auto& t = tiles[k];
    const std::string tctx = "tile #" + std::to_string(k);
    ManifestEntry e;
    e.index = integer(t, "index", 0);
    if (e.index != static_cast<int>(k)) throw DataError(ctx + ": " + tctx + " has index " + std::to_string(e.index));
    const auto& f = need(t, "file");
    if (!f.is_string() || f.get<std::string>().empty()) throw DataError(ctx + ": " + tctx + " file must be a name");
    e.file = f.get<std::string>();
    const auto& o = need(t, "origin");
    if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() || !o[1].is_number_integer()) {
      throw DataError(ctx + ": " + tctx + " origin must be [x0, y0]");
    }
    e.rect = {o[0].get<int>(), o[1].get<int>(), integer(t, "width", 1), integer(t, "height", 1)};
    const TileRect& r = e.rect;
    if (r.x0 < 0 || r.y0 < 0 || r.x1() > m.width || r.y1() > m.height || r.width > m.tile_px ||
        r.height > m.tile_px) {
      throw DataError(ctx + ": " + tctx + " lies outside the image or exceeds tile_px");
    }
    m.tiles.push_back(std::move(e));
  }
  return m;
}

inline TileManifest read_manifest(const std::filesystem::path& path) {
  return decode_manifest(detail::read_file(path), path.string());
}

inline void write_manifest(const std::filesystem::path& path, const TileManifest& m) {
  write_file(path, encode_manifest(m));
}

}  // namespace vcqc

#endif  // VCQC_TILING_MANIFEST_HPP
