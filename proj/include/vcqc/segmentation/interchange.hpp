// vcqc - virtual camera quality control for printed filaments
//
// Mask interchange files: the contract between the pipeline and external
// segmentation backends. JSON document:
//
//   {
//     "format": "vcqc-masks/1",
//     "image_id": "tile_0001",
//     "width": 512, "height": 512,
//     "frame": "tile" | "global",
//     "origin": [x0, y0],              // tile frame only
//     "backend": "baseline" | "external",
//     "masks": [ {"id": 1, "confidence": 0.93, "rle": [..],
//                 "member_tiles": [..]} ]   // member_tiles optional
//   }

#ifndef VCQC_SEGMENTATION_INTERCHANGE_HPP
#define VCQC_SEGMENTATION_INTERCHANGE_HPP

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/segmentation/mask.hpp"

namespace vcqc {

inline constexpr const char* kMaskFormat = "vcqc-masks/1";

/// Optional per-mask metadata carried by merged (global) instance files.
using MemberTiles = std::map<std::uint32_t, std::vector<int>>;

inline nlohmann::ordered_json masks_to_json(const SegmentationResult& r,
                                            const MemberTiles* members = nullptr) {
  nlohmann::ordered_json j;
  j["format"] = kMaskFormat;
  j["image_id"] = r.image_id;
  j["width"] = r.width;
  j["height"] = r.height;
  j["frame"] = r.frame.global ? "global" : "tile";
  if (!r.frame.global) j["origin"] = {r.frame.x0, r.frame.y0};
  j["backend"] = r.backend == Backend::Baseline ? "baseline" : "external";
  j["masks"] = nlohmann::ordered_json::array();
  for (const auto& m : r.masks) {
    nlohmann::ordered_json jm;
    jm["id"] = m.id;
    jm["confidence"] = m.confidence;
    jm["rle"] = rle_encode(m.bits);
    if (members) {
      if (auto it = members->find(m.id); it != members->end()) jm["member_tiles"] = it->second;
    }
    j["masks"].push_back(std::move(jm));
  }
  return j;
}

inline std::string encode_masks(const SegmentationResult& r, const MemberTiles* members = nullptr) {
  return masks_to_json(r, members).dump() + "\n";
}

namespace detail {

template <typename J>
const J& require(const J& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw DataError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

template <typename J>
int require_dim(const J& j, const char* key, const std::string& ctx) {
  const auto& v = require(j, key, ctx);
  if (!v.is_number_integer() || v.template get<long long>() < 1 ||
      v.template get<long long>() > (1 << 20)) {
    throw DataError(ctx + ": '" + key + "' must be a positive integer");
  }
  return v.template get<int>();
}

}  // namespace detail

/**
 * @brief Parses and validates an interchange document.
 *
 * Errors name the file and, for per-mask problems, the offending mask id.
 */
inline SegmentationResult masks_from_json(const nlohmann::ordered_json& j, const std::string& ctx,
                                          MemberTiles* members = nullptr) {
  using detail::require;
  if (!j.is_object()) throw DataError(ctx + ": document is not an object");
  const auto& fmt = require(j, "format", ctx);
  if (!fmt.is_string() || fmt.get<std::string>() != kMaskFormat) {
    throw DataError(ctx + ": unsupported format tag");
  }
  SegmentationResult r;
  const auto& id = require(j, "image_id", ctx);
  if (!id.is_string()) throw DataError(ctx + ": image_id must be a string");
  r.image_id = id.get<std::string>();
  r.width = detail::require_dim(j, "width", ctx);
  r.height = detail::require_dim(j, "height", ctx);
  const auto& frame = require(j, "frame", ctx);
  if (frame == "global") {
    r.frame = MaskFrame{};
  } else if (frame == "tile") {
    const auto& o = require(j, "origin", ctx);
    if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() ||
        !o[1].is_number_integer() || o[0].get<long long>() < 0 || o[1].get<long long>() < 0) {
      throw DataError(ctx + ": origin must be [x0, y0] non-negative integers");
    }
    r.frame = MaskFrame::tile(o[0].get<int>(), o[1].get<int>());
  } else {
    throw DataError(ctx + ": frame must be 'tile' or 'global'");
  }
  const auto& backend = require(j, "backend", ctx);
  if (backend == "baseline") {
    r.backend = Backend::Baseline;
  } else if (backend == "external") {
    r.backend = Backend::External;
  } else {
    throw DataError(ctx + ": backend must be 'baseline' or 'external'");
  }
  const auto& masks = require(j, "masks", ctx);
  if (!masks.is_array()) throw DataError(ctx + ": masks must be an array");
  std::set<std::uint32_t> seen;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    const auto& jm = masks[k];
    const std::string mctx = ctx + ": mask #" + std::to_string(k);
    const auto& mid = require(jm, "id", mctx);
    if (!mid.is_number_unsigned()) throw DataError(mctx + ": id must be a non-negative integer");
    InstanceMask m;
    m.id = mid.get<std::uint32_t>();
    const std::string ictx = ctx + ": mask id " + std::to_string(m.id);
    if (!seen.insert(m.id).second) throw DataError(ictx + ": duplicate id");
    const auto& conf = require(jm, "confidence", ictx);
    if (!conf.is_number() || !(conf.get<double>() >= 0.0 && conf.get<double>() <= 1.0)) {
      throw DataError(ictx + ": confidence must be a number in [0,1]");
    }
    m.confidence = conf.get<double>();
    const auto& rle = require(jm, "rle", ictx);
    if (!rle.is_array()) throw DataError(ictx + ": rle must be an integer list");
    std::vector<std::uint32_t> runs;
    runs.reserve(rle.size());
    for (const auto& v : rle) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFFFFFFFFull) {
        throw DataError(ictx + ": rle entries must be non-negative integers");
      }
      runs.push_back(v.get<std::uint32_t>());
    }
    try {
      m.bits = rle_decode(runs, r.width, r.height);
    } catch (const DataError& e) {
      throw DataError(ictx + ": " + e.what());
    }
    if (m.area() == 0) throw DataError(ictx + ": empty foreground");
    if (jm.contains("member_tiles")) {
      const auto& mt = jm.at("member_tiles");
      if (!mt.is_array()) throw DataError(ictx + ": member_tiles must be a list");
      std::vector<int> tiles;
      for (const auto& t : mt) {
        if (!t.is_number_integer()) throw DataError(ictx + ": member_tiles must be integers");
        tiles.push_back(t.get<int>());
      }
      if (members) (*members)[m.id] = std::move(tiles);
    }
    m.frame = r.frame;
    r.masks.push_back(std::move(m));
  }
  return r;
}

inline SegmentationResult decode_masks(const std::string& text, const std::string& ctx,
                                       MemberTiles* members = nullptr) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(ctx + ": invalid JSON: " + e.what());
  }
  return masks_from_json(j, ctx, members);
}

inline SegmentationResult import_masks(const std::filesystem::path& path,
                                       MemberTiles* members = nullptr) {
  return decode_masks(detail::read_file(path), path.string(), members);
}

inline void export_masks(const SegmentationResult& r, const std::filesystem::path& path,
                         const MemberTiles* members = nullptr) {
  write_file(path, encode_masks(r, members));
}

}  // namespace vcqc

#endif  // VCQC_SEGMENTATION_INTERCHANGE_HPP
