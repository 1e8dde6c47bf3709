// Shared helpers for the test suites: seeded generators and scratch dirs.

#ifndef VCQC_TESTS_SUPPORT_HPP
#define VCQC_TESTS_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vcqc/geometry/point_cloud.hpp"
#include "vcqc/segmentation/mask.hpp"

namespace vcqc::test {

/// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

  Bitmap bitmap(int w, int h, double p) {
    Bitmap b(w, h, 0);
    for (auto& v : b.data) v = coin(p) ? 1 : 0;
    return b;
  }

  PointCloud intensity_cloud(std::size_t n, double lo, double hi) {
    std::vector<Vec3> pts;
    std::vector<double> s;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back(vec(lo, hi));
      s.push_back(uniform(0.0, 1.0));
    }
    return PointCloud(std::move(pts), ColorAttr::from_intensity(std::move(s)));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vcqc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline PointCloud gray_cloud(std::vector<Vec3> pts, double v = 0.5) {
  std::vector<double> s(pts.size(), v);
  return PointCloud(std::move(pts), ColorAttr::from_intensity(std::move(s)));
}

}  // namespace vcqc::test

#endif  // VCQC_TESTS_SUPPORT_HPP
