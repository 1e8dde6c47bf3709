// vcqc - virtual camera quality control for printed filaments
//
// Plane fitting: total least squares and RANSAC with least-squares refinement.
// The fitted plane serves as the reference surface for signed-distance
// coloring of structured-light captures.

#ifndef VCQC_GEOMETRY_PLANE_FIT_HPP
#define VCQC_GEOMETRY_PLANE_FIT_HPP

#include <Eigen/Eigenvalues>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "vcqc/geometry/point_cloud.hpp"

namespace vcqc {

struct LeastSquaresFit {};

struct RansacFit {
  int iterations{500};
  double inlier_tol_m{0.002};
  std::uint64_t seed{0x5eed};
};

using PlaneFitMethod = std::variant<LeastSquaresFit, RansacFit>;

namespace detail {

// Flip so the largest-magnitude component is positive (first one on ties).
inline Plane canonical_plane(Vec3 n, const Vec3& through) {
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) > std::abs(n[k]) + 1e-12) k = i;
  }
  if (n[k] < 0) n = -n;
  return {n, n.dot(through)};
}

inline Plane fit_plane_tls(std::span<const Vec3> pts) {
  if (pts.size() < 3) {
    throw InvalidArgument("fit_plane: need at least 3 points");
  }
  std::array<CompensatedSum, 3> acc;
  for (const Vec3& p : pts) {
    for (int k = 0; k < 3; ++k) acc[k].add(p[k]);
  }
  const double n = static_cast<double>(pts.size());
  const Vec3 mean(acc[0].value() / n, acc[1].value() / n, acc[2].value() / n);
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) {
    const Vec3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2]) {
    throw InvalidArgument("fit_plane: points are collinear or coincident");
  }
  return canonical_plane(eig.eigenvectors().col(0).normalized(), mean);
}

}  // namespace detail

/**
 * @brief Fits a plane to the cloud.
 *
 * Least squares returns the total-least-squares plane (normal = smallest
 * principal axis of the centered covariance). RANSAC samples point triples,
 * keeps the hypothesis with the most inliers (first found wins ties), then
 * refines by least squares on those inliers.
 */
inline Plane fit_plane(std::span<const Vec3> pts, const PlaneFitMethod& method) {
  if (std::holds_alternative<LeastSquaresFit>(method)) {
    return detail::fit_plane_tls(pts);
  }
  const auto& cfg = std::get<RansacFit>(method);
  if (pts.size() < 3) throw InvalidArgument("fit_plane: need at least 3 points");
  if (cfg.iterations < 1 || !(cfg.inlier_tol_m > 0.0)) {
    throw InvalidArgument("fit_plane: ransac needs iterations >= 1 and tol > 0");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::size_t best_count = 0;
  Plane best;
  for (int it = 0; it < cfg.iterations; ++it) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = n.norm();
    if (len < 1e-12) continue;
    const Plane cand{n / len, (n / len).dot(pts[a])};
    std::size_t count = 0;
    for (const Vec3& p : pts) {
      if (std::abs(cand.signed_distance(p)) <= cfg.inlier_tol_m) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = cand;
    }
  }
  if (best_count < 3) {
    throw InvalidArgument("fit_plane: ransac found no non-degenerate plane");
  }
  std::vector<Vec3> inliers;
  inliers.reserve(best_count);
  for (const Vec3& p : pts) {
    if (std::abs(best.signed_distance(p)) <= cfg.inlier_tol_m) inliers.push_back(p);
  }
  return detail::fit_plane_tls(inliers);
}

inline Plane fit_plane(const PointCloud& cloud, const PlaneFitMethod& method) {
  return fit_plane(std::span<const Vec3>(cloud.points()), method);
}

}  // namespace vcqc

#endif  // VCQC_GEOMETRY_PLANE_FIT_HPP
