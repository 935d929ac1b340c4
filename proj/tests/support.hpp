#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ccshape/shape_core.hpp"

namespace testing_support {

inline std::vector<double> random_positions(std::mt19937_64& rng, std::size_t n, int dim, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> x(n * static_cast<std::size_t>(dim));
  for (double& v : x) v = g(rng);
  return x;
}

inline std::vector<double> random_masses(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> m(n);
  for (double& v : m) v = u(rng);
  return m;
}

inline ccshape::MassConfiguration random_config(std::mt19937_64& rng, std::size_t n, int dim, bool equal = false) {
  return {dim, equal ? std::vector<double>(n, 1.0) : random_masses(rng, n), random_positions(rng, n, dim)};
}

inline ccshape::MassConfiguration equilateral(double side = 1.0) {
  return ccshape::MassConfiguration::equal_masses(2, {0.0, 0.0, side, 0.0, 0.5 * side, 0.5 * std::sqrt(3.0) * side});
}

inline ccshape::MassConfiguration collinear3(double spacing = 1.0) {
  return ccshape::MassConfiguration::equal_masses(2, {-spacing, 0.0, 0.0, 0.0, spacing, 0.0});
}

inline ccshape::MassConfiguration unit_square() {
  return ccshape::MassConfiguration::equal_masses(2, {0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0});
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Random rotation matrix (row-major dim x dim) from QR of a Gaussian matrix.
inline std::vector<double> random_rotation(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  std::vector<double> q(static_cast<std::size_t>(dim * dim));
  for (double& v : q) v = g(rng);
  for (int r = 0; r < dim; ++r) {
    for (int p = 0; p < r; ++p) {
      double d = 0.0;
      for (int c = 0; c < dim; ++c) d += q[r * dim + c] * q[p * dim + c];
      for (int c = 0; c < dim; ++c) q[r * dim + c] -= d * q[p * dim + c];
    }
    double nrm = 0.0;
    for (int c = 0; c < dim; ++c) nrm += q[r * dim + c] * q[r * dim + c];
    nrm = std::sqrt(nrm);
    for (int c = 0; c < dim; ++c) q[r * dim + c] /= nrm;
  }
  if (dim == 2 && q[0] * q[3] - q[1] * q[2] < 0) {
    q[2] = -q[2], q[3] = -q[3];
  }
  return q;
}

inline std::vector<double> similarity(const std::vector<double>& x, int dim, const std::vector<double>& rot,
                                      double scale, const std::vector<double>& shift) {
  std::vector<double> y(x.size());
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (int r = 0; r < dim; ++r) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += rot[r * dim + c] * x[i * dim + c];
      y[i * dim + r] = scale * s + shift[r];
    }
  }
  return y;
}

}  // namespace testing_support
