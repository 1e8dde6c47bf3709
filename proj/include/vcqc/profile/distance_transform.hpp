// vcqc - virtual camera quality control for printed filaments
//
// Exact Euclidean distance transform by the separable lower-envelope method
// (squared distances, one 1D pass per axis).

#ifndef VCQC_PROFILE_DISTANCE_TRANSFORM_HPP
#define VCQC_PROFILE_DISTANCE_TRANSFORM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "vcqc/segmentation/mask.hpp"

namespace vcqc {

/// Per-pixel distance (pixels) to the nearest background pixel.
struct DistanceMap {
  Raster<double> values;
  std::uint32_t mask_id{0};
};

namespace detail {

inline constexpr double kEdtInf = 1e20;

// 1D squared distance transform of a sampled function (lower envelope of
// parabolas rooted at each sample). `f` and `d` have length n; scratch
// vectors are reused across calls.
inline void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  auto meet = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
  };
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/**
 * @brief Exact Euclidean distance transform of a binary mask.
 *
 * The mask is padded with a one-pixel background border first, so pixels on
 * the mask edge are at distance 1 from "outside" and an all-foreground mask
 * is well defined. Background pixels get exactly 0.
 */
inline DistanceMap distance_transform(const Bitmap& mask, std::uint32_t mask_id = 0) {
  const int w = mask.width + 2, h = mask.height + 2;
  std::vector<double> sq(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) sq[static_cast<std::size_t>(y + 1) * w + x + 1] = detail::kEdtInf;
    }
  }
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> col(h), out(std::max(w, h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = sq[static_cast<std::size_t>(y) * w + x];
    detail::edt_1d(col.data(), out.data(), h, v, z);
    for (int y = 0; y < h; ++y) sq[static_cast<std::size_t>(y) * w + x] = out[y];
  }
  for (int y = 0; y < h; ++y) {
    double* row = &sq[static_cast<std::size_t>(y) * w];
    detail::edt_1d(row, out.data(), w, v, z);
    std::copy_n(out.data(), w, row);
  }
  DistanceMap dm;
  dm.mask_id = mask_id;
  dm.values = Raster<double>(mask.width, mask.height, 0.0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      dm.values.at(x, y) =
          mask.at(x, y) ? std::sqrt(sq[static_cast<std::size_t>(y + 1) * w + x + 1]) : 0.0;
    }
  }
  return dm;
}

}  // namespace vcqc

#endif  // VCQC_PROFILE_DISTANCE_TRANSFORM_HPP
