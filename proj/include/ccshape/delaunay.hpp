#pragma once

// Bowyer-Watson Delaunay triangulation in 2D and 3D on top of the filtered
// exact predicates. Insertion scans all live simplices (O(N * T)), which is
// ample for the particle counts handled here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ccshape/errors.hpp"
#include "ccshape/predicates.hpp"

namespace ccshape {

using Simplex = std::array<std::size_t, 4>;  // first dim + 1 entries used

struct Triangulation {
  int dim = 2;
  std::vector<Simplex> simplices;  // positively oriented

  /// Closed point-in-union-of-simplices test (the union is the convex hull).
  [[nodiscard]] bool contains(std::span<const double> x, std::span<const double> p) const {
    for (const auto& s : simplices) {
      if (dim == 2) {
        const predicates::Point2 q{p[0], p[1]};
        auto pt = [&](std::size_t i) { return predicates::Point2{x[2 * i], x[2 * i + 1]}; };
        const auto a = pt(s[0]), b = pt(s[1]), c = pt(s[2]);
        if (predicates::orient2d(a, b, q) >= 0 && predicates::orient2d(b, c, q) >= 0 &&
            predicates::orient2d(c, a, q) >= 0) {
          return true;
        }
      } else {
        const predicates::Point3 q{p[0], p[1], p[2]};
        auto pt = [&](std::size_t i) { return predicates::Point3{x[3 * i], x[3 * i + 1], x[3 * i + 2]}; };
        const std::array<predicates::Point3, 4> v{pt(s[0]), pt(s[1]), pt(s[2]), pt(s[3])};
        bool inside = true;
        for (int k = 0; k < 4 && inside; ++k) {
          auto w = v;
          w[k] = q;
          inside = predicates::orient3d(w[0], w[1], w[2], w[3]) >= 0;
        }
        if (inside) return true;
      }
    }
    return false;
  }
};

namespace detail {

inline void require_full_dimension(int dim, std::span<const double> x, std::size_t n) {
  if (n < static_cast<std::size_t>(dim + 1)) throw DegenerateGeometry("too few points for a triangulation");
  if (dim == 2) {
    const predicates::Point2 a{x[0], x[1]};
    std::size_t j = 1;
    while (j < n && x[2 * j] == a[0] && x[2 * j + 1] == a[1]) ++j;
    if (j == n) throw DegenerateGeometry("all points coincide");
    const predicates::Point2 b{x[2 * j], x[2 * j + 1]};
    for (std::size_t k = 0; k < n; ++k) {
      if (predicates::orient2d(a, b, {x[2 * k], x[2 * k + 1]}) != 0) return;
    }
    throw DegenerateGeometry("all points are collinear");
  }
  auto pt = [&](std::size_t i) { return predicates::Point3{x[3 * i], x[3 * i + 1], x[3 * i + 2]}; };
  const auto a = pt(0);
  std::size_t j = 1;
  while (j < n && pt(j) == a) ++j;
  if (j == n) throw DegenerateGeometry("all points coincide");
  const auto b = pt(j);
  std::size_t k = 0;
  for (; k < n; ++k) {
    const auto c = pt(k);
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double cx = uy * vz - uz * vy, cy = uz * vx - ux * vz, cz = ux * vy - uy * vx;
    if (cx != 0.0 || cy != 0.0 || cz != 0.0) break;
  }
  if (k == n) throw DegenerateGeometry("all points are collinear");
  const auto c = pt(k);
  for (std::size_t t = 0; t < n; ++t) {
    if (predicates::orient3d(a, b, c, pt(t)) != 0) return;
  }
  throw DegenerateGeometry("all points are coplanar");
}

}  // namespace detail

/// Delaunay triangulation of the points x (flat, dim per point). Duplicate
/// points are skipped. Throws DegenerateGeometry for affinely dependent input.
inline Triangulation delaunay(int dim, std::span<const double> x) {
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  detail::require_full_dimension(dim, x, n);

  // working copy with super-simplex vertices appended
  std::vector<double> pts(x.begin(), x.end());
  std::vector<double> lo(dim, INFINITY), hi(dim, -INFINITY);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      lo[a] = std::min(lo[a], x[i * dim + a]);
      hi[a] = std::max(hi[a], x[i * dim + a]);
    }
  }
  double extent = 0.0;
  std::vector<double> mid(dim);
  for (int a = 0; a < dim; ++a) {
    extent = std::max(extent, hi[a] - lo[a]);
    mid[a] = 0.5 * (lo[a] + hi[a]);
  }
  const double big = 1e5 * std::max(extent, 1e-300);
  if (dim == 2) {
    pts.insert(pts.end(), {mid[0] - big, mid[1] - big, mid[0] + big, mid[1] - big, mid[0], mid[1] + big});
  } else {
    pts.insert(pts.end(), {mid[0] - big, mid[1] - big, mid[2] - big, mid[0] + big, mid[1] - big, mid[2] - big,
                           mid[0], mid[1] + big, mid[2] - big, mid[0], mid[1], mid[2] + big});
  }

  auto p2 = [&](std::size_t i) { return predicates::Point2{pts[2 * i], pts[2 * i + 1]}; };
  auto p3 = [&](std::size_t i) { return predicates::Point3{pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]}; };
  auto orient = [&](const Simplex& s) {
    return dim == 2 ? predicates::orient2d(p2(s[0]), p2(s[1]), p2(s[2]))
                    : predicates::orient3d(p3(s[0]), p3(s[1]), p3(s[2]), p3(s[3]));
  };
  auto in_circum = [&](const Simplex& s, std::size_t q) {
    return dim == 2 ? predicates::incircle(p2(s[0]), p2(s[1]), p2(s[2]), p2(q)) > 0
                    : predicates::insphere(p3(s[0]), p3(s[1]), p3(s[2]), p3(s[3]), p3(q)) > 0;
  };

  const int verts = dim + 1;
  std::vector<Simplex> live;
  {
    Simplex s{n, n + 1, n + 2, dim == 3 ? n + 3 : 0};
    if (orient(s) < 0) std::swap(s[0], s[1]);
    live.push_back(s);
  }

  std::vector<Simplex> keep;
  std::vector<Simplex> bad;
  for (std::size_t q = 0; q < n; ++q) {
    bool duplicate = false;
    for (std::size_t r = 0; r < q && !duplicate; ++r) {
      duplicate = std::equal(pts.begin() + r * dim, pts.begin() + (r + 1) * dim, pts.begin() + q * dim);
    }
    if (duplicate) continue;

    keep.clear();
    bad.clear();
    for (const auto& s : live) (in_circum(s, q) ? bad : keep).push_back(s);
    // cavity boundary: facets that belong to exactly one bad simplex
    std::map<std::array<std::size_t, 3>, int> facet_count;
    auto facet_key = [&](const Simplex& s, int skip) {
      std::array<std::size_t, 3> f{};
      for (int v = 0, k = 0; v < verts; ++v) {
        if (v != skip) f[k++] = s[v];
      }
      if (dim == 2) f[2] = static_cast<std::size_t>(-1);
      std::sort(f.begin(), f.end());
      return f;
    };
    for (const auto& s : bad) {
      for (int v = 0; v < verts; ++v) ++facet_count[facet_key(s, v)];
    }
    for (const auto& s : bad) {
      for (int v = 0; v < verts; ++v) {
        if (facet_count[facet_key(s, v)] != 1) continue;
        Simplex t = s;
        t[v] = q;  // same side of the facet as the removed vertex: orientation preserved
        if (orient(t) > 0) keep.push_back(t);
      }
    }
    live.swap(keep);
  }

  Triangulation tri;
  tri.dim = dim;
  for (const auto& s : live) {
    bool real = true;
    for (int v = 0; v < verts; ++v) real = real && s[v] < n;
    if (real) tri.simplices.push_back(s);
  }
  std::sort(tri.simplices.begin(), tri.simplices.end());
  return tri;
}

/// Circumcentre of a simplex; nullopt when it is numerically flat.
inline std::optional<std::vector<double>> circumcenter(int dim, std::span<const double> x, const Simplex& s) {
  if (dim == 2) {
    const double ax = x[2 * s[0]], ay = x[2 * s[0] + 1];
    const double bx = x[2 * s[1]] - ax, by = x[2 * s[1] + 1] - ay;
    const double cx = x[2 * s[2]] - ax, cy = x[2 * s[2] + 1] - ay;
    const double d = 2.0 * (bx * cy - by * cx);
    if (d == 0.0) return std::nullopt;
    const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    return std::vector<double>{ax + (cy * b2 - by * c2) / d, ay + (bx * c2 - cx * b2) / d};
  }
  // solve 2 (p_k - p_0) . c = |p_k|^2 - |p_0|^2 relative to p_0
  std::array<std::array<double, 3>, 3> m{};
  std::array<double, 3> rhs{};
  for (int k = 0; k < 3; ++k) {
    double l = 0.0;
    for (int a = 0; a < 3; ++a) {
      m[k][a] = x[3 * s[k + 1] + a] - x[3 * s[0] + a];
      l += m[k][a] * m[k][a];
    }
    rhs[k] = 0.5 * l;
  }
  auto det3 = [](const std::array<std::array<double, 3>, 3>& q) {
    return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
           q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  };
  const double d = det3(m);
  if (d == 0.0) return std::nullopt;
  std::vector<double> c(3);
  for (int a = 0; a < 3; ++a) {
    auto q = m;
    for (int k = 0; k < 3; ++k) q[k][a] = rhs[k];
    c[a] = x[3 * s[0] + a] + det3(q) / d;
  }
  return c;
}

}  // namespace ccshape
