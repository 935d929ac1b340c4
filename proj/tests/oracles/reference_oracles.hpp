#pragma once

// Slow, direct reference implementations. Nothing here shares code with the
// library beyond MassConfiguration as an input container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccshape/errors.hpp"
#include "ccshape/shape_core.hpp"

namespace oracle {

struct OracleResult {
  std::string quantity;
  double value = 0.0;
  std::string method;  // "closed-form" | "brute-force" | "Monte Carlo"
  double tolerance = 0.0;
};

class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline OracleResult analytic_c_two_body(double m1, double m2) {
  if (!(m1 > 0.0 && m2 > 0.0) || std::abs(m1 + m2 - 1.0) > 1e-15) {
    throw std::invalid_argument("analytic_c_two_body: need positive masses summing to 1");
  }
  // l_rms = sqrt(m1 m2) r, 1/l_mhl = m1 m2 / r
  return {"C(two body)", std::pow(m1 * m2, 1.5), "closed-form", 1e-15};
}

enum class ThreeBodyShape { equilateral, collinear_equispaced };

inline OracleResult analytic_c_three_equal(ThreeBodyShape s) {
  if (s == ThreeBodyShape::equilateral) {
    // unit side: l_rms^2 = 3/9, V = 3/9
    return {"C(equilateral)", std::pow(3.0, -1.5), "closed-form", 1e-15};
  }
  // spacing 1: separations 1, 1, 2; l_rms^2 = 6/9, V = (1 + 1 + 1/2)/9
  return {"C(collinear)", 5.0 / 18.0 * std::sqrt(2.0 / 3.0), "closed-form", 1e-15};
}

/// Unit square with equal masses 1/4: separations 1 (x4) and sqrt2 (x2).
inline OracleResult analytic_c_square() {
  return {"C(square)", (1.0 + 2.0 * std::sqrt(2.0)) / 16.0, "closed-form", 1e-15};
}

/// Equilateral triangle with arbitrary masses (sum 1): C = (sum_{i<j} m_i m_j)^{3/2}.
inline OracleResult analytic_c_equilateral(double m1, double m2, double m3) {
  const double p = m1 * m2 + m1 * m3 + m2 * m3;
  return {"C(equilateral, masses)", std::pow(p, 1.5), "closed-form", 1e-15};
}

/// Plain double loop over pairs.
inline double naive_complexity(int dim, const std::vector<double>& m, const std::vector<double>& x) {
  double inertia = 0.0;
  double potential = 0.0;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = x[i * dim + a] - x[j * dim + a];
        r2 += d * d;
      }
      inertia += m[i] * m[j] * r2;
      potential += m[i] * m[j] / std::sqrt(r2);
    }
  }
  return std::sqrt(inertia) * potential;
}

/// Central differences of C, coordinate by coordinate.
inline std::vector<double> fd_gradient(const ccshape::MassConfiguration& c, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be > 0");
  const std::vector<double> m(c.masses().begin(), c.masses().end());
  std::vector<double> x(c.positions().begin(), c.positions().end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + step;
    (void)c.with_positions(x);  // CollisionError if the step lands on a collision
    const double up = naive_complexity(c.dim(), m, x);
    x[k] = saved - step;
    (void)c.with_positions(x);
    const double down = naive_complexity(c.dim(), m, x);
    x[k] = saved;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

struct BruteEdge {
  std::size_t i = 0, j = 0;
  double length = 0.0;
};

struct BruteMst {
  std::vector<BruteEdge> edges;
  double weight = 0.0;
};

/// Minimum over every labelled tree on N <= 8 vertices, enumerated as Pruefer
/// sequences (N^(N-2) trees).
inline BruteMst brute_force_mst(int dim, const std::vector<double>& x) {
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  if (n > 8) throw TooLarge("brute_force_mst: N > 8");
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (x[i * dim + a] - x[j * dim + a]) * (x[i * dim + a] - x[j * dim + a]);
    return std::sqrt(s);
  };
  BruteMst best;
  best.weight = INFINITY;
  if (n < 2) return {{}, 0.0};
  if (n == 2) return {{{0, 1, dist(0, 1)}}, dist(0, 1)};
  std::vector<std::size_t> seq(n - 2, 0);
  for (;;) {
    std::vector<std::size_t> degree(n, 1);
    for (auto v : seq) ++degree[v];
    std::vector<BruteEdge> edges;
    double w = 0.0;
    for (auto v : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      edges.push_back({std::min(leaf, v), std::max(leaf, v), dist(leaf, v)});
      w += edges.back().length;
      --degree[leaf];
      --degree[v];
    }
    std::size_t u = n, v = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (degree[k] == 1) (u == n ? u : v) = k;
    }
    edges.push_back({u, v, dist(u, v)});
    w += edges.back().length;
    if (w < best.weight) best = {edges, w};

    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == n) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return best;
}

/// Kruskal over all N(N-1)/2 edges, ties broken by (length, i, j).
inline BruteMst kruskal_mst(int dim, const std::vector<double>& x) {
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  std::vector<BruteEdge> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < dim; ++a) s += (x[i * dim + a] - x[j * dim + a]) * (x[i * dim + a] - x[j * dim + a]);
      all.push_back({i, j, std::sqrt(s)});
    }
  }
  std::sort(all.begin(), all.end(), [](const BruteEdge& a, const BruteEdge& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };
  BruteMst out;
  for (const auto& e : all) {
    const auto a = find(e.i), b = find(e.j);
    if (a == b) continue;
    parent[a] = b;
    out.edges.push_back(e);
    out.weight += e.length;
  }
  return out;
}

/// Coefficient of variation of nearest-neighbour distances of a Poisson
/// (uniform) sample in the unit disk, inner 70% of the radius, averaged over trials.
inline OracleResult poisson_nn_cv(std::size_t n, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x;
    while (x.size() < 2 * n) {
      const double a = u(rng), b = u(rng);
      if (a * a + b * b <= 1.0) x.insert(x.end(), {a, b});
    }
    std::vector<double> nn;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::hypot(x[2 * i], x[2 * i + 1]) > 0.7) continue;
      double best = INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) best = std::min(best, std::hypot(x[2 * i] - x[2 * j], x[2 * i + 1] - x[2 * j + 1]));
      }
      nn.push_back(best);
    }
    const double mean = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(nn.size());
    double var = 0.0;
    for (double v : nn) var += (v - mean) * (v - mean);
    acc += std::sqrt(var / static_cast<double>(nn.size())) / mean;
  }
  return {"nn cv (Poisson)", acc / trials, "Monte Carlo", 0.05};
}

/// Tier split by hand: sort, cut where the relative gap exceeds g.
inline std::vector<std::vector<double>> gap_split(std::vector<double> v, double g) {
  std::sort(v.begin(), v.end());
  std::vector<std::vector<double>> tiers;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k == 0 || (v[k] - v[k - 1]) / v[k - 1] > g) tiers.emplace_back();
    tiers.back().push_back(v[k]);
  }
  return tiers;
}

}  // namespace oracle
