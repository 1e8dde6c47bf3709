// vcqc - virtual camera quality control for printed filaments
//
// Filament thickness profiles from distance maps, and comparison against the
// planned nozzle heights.
//
// Image columns are assumed to cut across the filament (filaments run
// horizontally in the render). The ridge of the distance map in a column is
// half the local thickness.

#ifndef VCQC_PROFILE_THICKNESS_HPP
#define VCQC_PROFILE_THICKNESS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "vcqc/profile/distance_transform.hpp"

namespace vcqc {

enum class ProfileMode { Max, Mean };

inline ProfileMode parse_profile_mode(std::string_view s) {
  if (s == "max") return ProfileMode::Max;
  if (s == "mean") return ProfileMode::Mean;
  throw InvalidArgument("unknown profile mode '" + std::string(s) + "'");
}

inline const char* to_string(ProfileMode m) { return m == ProfileMode::Max ? "max" : "mean"; }

struct ProfileStats {
  std::size_t count{0};
  double mean{0.0};
  double min{0.0};
  double max{0.0};
  double stddev{0.0};
};

struct ThicknessProfile {
  ProfileMode mode{ProfileMode::Max};
  double gsd_m{0.0};
  int first_column{0};  ///< global column of entry 0
  std::vector<double> ridge_px;
  std::vector<double> thickness_px;
  std::vector<double> thickness_mm;
  std::vector<std::uint8_t> valid;
  ProfileStats stats;  ///< over valid columns, thickness in mm

  [[nodiscard]] std::size_t columns() const { return ridge_px.size(); }
};

/// Stats of `values` where `valid` is set. Population standard deviation.
inline ProfileStats profile_stats(const std::vector<double>& values, const std::vector<std::uint8_t>& valid) {
  ProfileStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!valid[i]) continue;
    if (s.count == 0) s.min = s.max = values[i];
    s.min = std::min(s.min, values[i]);
    s.max = std::max(s.max, values[i]);
    sum += values[i];
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / s.count;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (valid[i]) var += (values[i] - s.mean) * (values[i] - s.mean);
  }
  s.stddev = std::sqrt(var / s.count);
  return s;
}

/**
 * @brief Per-column thickness from a distance map.
 *
 * ridge = max (or mean over foreground pixels) of the column's distances;
 * thickness_px = 2 * ridge; thickness_mm = thickness_px * gsd_m * 1000.
 * Columns without foreground are invalid and excluded from the stats.
 */
inline ThicknessProfile column_profile(const DistanceMap& dmap, ProfileMode mode, double gsd_m,
                                       int first_column = 0) {
  if (!(gsd_m > 0.0)) throw InvalidArgument("column_profile: gsd must be > 0");
  const auto& d = dmap.values;
  ThicknessProfile p;
  p.mode = mode;
  p.gsd_m = gsd_m;
  p.first_column = first_column;
  p.ridge_px.assign(d.width, 0.0);
  p.valid.assign(d.width, 0);
  for (int x = 0; x < d.width; ++x) {
    double best = 0.0, sum = 0.0;
    int n = 0;
    for (int y = 0; y < d.height; ++y) {
      const double v = d.at(x, y);
      if (v <= 0.0) continue;
      best = std::max(best, v);
      sum += v;
      ++n;
    }
    if (n == 0) continue;
    p.valid[x] = 1;
    p.ridge_px[x] = mode == ProfileMode::Max ? best : sum / n;
  }
  p.thickness_px.resize(d.width);
  p.thickness_mm.resize(d.width);
  for (int x = 0; x < d.width; ++x) {
    p.thickness_px[x] = 2.0 * p.ridge_px[x];
    p.thickness_mm[x] = p.thickness_px[x] * gsd_m * 1000.0;
  }
  p.stats = profile_stats(p.thickness_mm, p.valid);
  return p;
}

// =============================================================================
// Plan comparison
// =============================================================================

/// What compare_to_plan needs to know about each measured instance.
struct MeasuredInstance {
  std::uint32_t id{0};
  ThicknessProfile profile;
  double mean_row{0.0};  ///< mean image row of the mask
  int row_min{0};
  int row_max{0};
};

struct PlanEntry {
  std::uint32_t instance_id{0};
  std::size_t layer{0};  ///< 0 = bottom
  double planned_mm{0.0};
  double measured_mm{0.0};  ///< max thickness over valid columns
  double deviation_mm{0.0};
};

struct PlanComparison {
  std::vector<PlanEntry> entries;
  bool overlap_warning{false};  ///< vertical ranges of consecutive layers intersect
};

/**
 * @brief Matches instances bottom-to-top against planned layer heights.
 *
 * Instances are ordered by descending mean row (image rows grow downward,
 * so the bottom layer comes first). Layer t is compared with plan[t]:
 * deviation = max thickness - planned.
 */
inline PlanComparison compare_to_plan(const std::vector<MeasuredInstance>& instances,
                                      const std::vector<double>& plan_mm) {
  if (instances.size() > plan_mm.size()) {
    throw InvalidArgument("compare_to_plan: " + std::to_string(instances.size()) +
                          " instances but only " + std::to_string(plan_mm.size()) + " planned layers");
  }
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instances[a].mean_row != instances[b].mean_row) return instances[a].mean_row > instances[b].mean_row;
    return instances[a].id < instances[b].id;
  });
  PlanComparison cmp;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const auto& m = instances[order[t]];
    PlanEntry e;
    e.instance_id = m.id;
    e.layer = t;
    e.planned_mm = plan_mm[t];
    e.measured_mm = m.profile.stats.count ? m.profile.stats.max : 0.0;
    e.deviation_mm = e.measured_mm - e.planned_mm;
    cmp.entries.push_back(e);
    if (t > 0) {
      const auto& below = instances[order[t - 1]];
      if (m.row_max >= below.row_min) cmp.overlap_warning = true;
    }
  }
  return cmp;
}

}  // namespace vcqc

#endif  // VCQC_PROFILE_THICKNESS_HPP
