#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapeinst/ssm.hpp"

namespace testing_support {

using shapeinst::Frame2;
using shapeinst::Frame3;
using shapeinst::Triangle;

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  }
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Vector3d v(nd(rng), nd(rng), nd(rng));
  return v.normalized();
}

// Unit cube [0,1]^3, outward-facing triangles.
inline void unit_cube(Frame3& v, std::vector<Triangle>& f) {
  v.resize(8, 3);
  for (int i = 0; i < 8; ++i) v.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
  f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
       {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
}

// Latitude-longitude sphere built independently of the phantom generator.
inline void uv_sphere(double r, int rings, int segments, Frame3& v, std::vector<Triangle>& f) {
  const double pi = std::numbers::pi;
  const int n = 2 + rings * segments;
  v.resize(n, 3);
  v.row(0) << 0, 0, r;
  for (int j = 0; j < rings; ++j) {
    const double th = pi * (j + 1) / (rings + 1);
    for (int k = 0; k < segments; ++k) {
      const double ph = 2 * pi * k / segments;
      v.row(1 + j * segments + k) << r * std::sin(th) * std::cos(ph),
          r * std::sin(th) * std::sin(ph), r * std::cos(th);
    }
  }
  v.row(n - 1) << 0, 0, -r;
  f.clear();
  auto id = [&](int j, int k) { return 1 + j * segments + (k % segments); };
  for (int k = 0; k < segments; ++k) f.push_back({0, id(0, k), id(0, k + 1)});
  for (int j = 0; j + 1 < rings; ++j) {
    for (int k = 0; k < segments; ++k) {
      f.push_back({id(j, k), id(j + 1, k), id(j, k + 1)});
      f.push_back({id(j, k + 1), id(j + 1, k), id(j + 1, k + 1)});
    }
  }
  for (int k = 0; k < segments; ++k) f.push_back({n - 1, id(rings - 1, k + 1), id(rings - 1, k)});
}

inline Frame2 regular_polygon(int n, double r, double phase = 0.0) {
  Frame2 p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2 * std::numbers::pi * i / n;
    p.row(i) << r * std::cos(a), r * std::sin(a);
  }
  return p;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("shapeinst_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
