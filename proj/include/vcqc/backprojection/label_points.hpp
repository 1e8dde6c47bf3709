// vcqc - virtual camera quality control for printed filaments
//
// Back-projection of 2D instance labels onto the 3D points that won the
// corresponding pixels in the render. Only z-buffer winners are labeled;
// points hidden behind the visible surface keep label 0.

#ifndef VCQC_BACKPROJECTION_LABEL_POINTS_HPP
#define VCQC_BACKPROJECTION_LABEL_POINTS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/render/renderer.hpp"
#include "vcqc/tiling/merge.hpp"

namespace vcqc {

inline constexpr std::uint32_t kUnlabeled = 0;

struct LabeledCloud {
  PointCloud base;
  std::vector<std::uint32_t> labels;  ///< instance id per point, 0 = unlabeled
  std::string render_id;

  [[nodiscard]] std::size_t labeled_count() const {
    std::size_t n = 0;
    for (auto l : labels) n += l != kUnlabeled;
    return n;
  }
};

/**
 * @brief Labels every point referenced by a masked, non-empty pixel.
 *
 * A point claimed by several instances (through different pixels of its
 * splat, or overlapping masks) goes to the higher confidence, then the lower
 * instance id. Instance ids must be non-zero.
 */
inline LabeledCloud label_points(const PointCloud& cloud, const Raster<std::uint32_t>& index_map,
                                 std::span<const GlobalInstance> instances,
                                 std::string render_id = "render") {
  LabeledCloud out{cloud, std::vector<std::uint32_t>(cloud.size(), kUnlabeled), std::move(render_id)};
  std::vector<double> claim_conf(cloud.size(), -1.0);
  const int w = index_map.width, h = index_map.height;
  for (const auto& inst : instances) {
    if (inst.id == kUnlabeled) throw InvalidArgument("label_points: instance id 0 is reserved");
    const TileRect b = inst.mask.bounds();
    if (b.x0 < 0 || b.y0 < 0 || b.x1() > w || b.y1() > h) {
      throw InvalidArgument("label_points: instance " + std::to_string(inst.id) +
                            " extends beyond the " + std::to_string(w) + "x" + std::to_string(h) + " render");
    }
    for (int y = b.y0; y < b.y1(); ++y) {
      for (int x = b.x0; x < b.x1(); ++x) {
        if (!inst.mask.bits.at(x - b.x0, y - b.y0)) continue;
        const std::uint32_t pi = index_map.at(x, y);
        if (pi == kEmptyIndex) continue;
        if (pi >= cloud.size()) throw InvalidArgument("label_points: index map refers past the cloud");
        const bool better = inst.confidence > claim_conf[pi] ||
                            (inst.confidence == claim_conf[pi] && inst.id < out.labels[pi]);
        if (out.labels[pi] == kUnlabeled || better) {
          out.labels[pi] = inst.id;
          claim_conf[pi] = inst.confidence;
        }
      }
    }
  }
  return out;
}

inline LabeledCloud label_points(const PointCloud& cloud, const RenderBuffer& buf,
                                 std::span<const GlobalInstance> instances,
                                 std::string render_id = "render") {
  return label_points(cloud, buf.index_map, instances, std::move(render_id));
}

/// PLY with the original xyz and color plus a `label` property.
inline void export_labeled(const LabeledCloud& cloud, const std::filesystem::path& path,
                           PlyEncoding enc = PlyEncoding::BinaryLE) {
  save_ply(path, cloud.base, enc, &cloud.labels);
}

/// Legend mapping instance id -> confidence and contributing tiles.
inline std::string encode_label_legend(std::span<const GlobalInstance> instances, const std::string& render_id) {
  nlohmann::ordered_json j;
  j["render_id"] = render_id;
  j["unlabeled"] = kUnlabeled;
  j["labels"] = nlohmann::ordered_json::array();
  for (const auto& inst : instances) {
    j["labels"].push_back({{"id", inst.id}, {"confidence", inst.confidence}, {"member_tiles", inst.member_tiles}});
  }
  return j.dump(2) + "\n";
}

}  // namespace vcqc

#endif  // VCQC_BACKPROJECTION_LABEL_POINTS_HPP
