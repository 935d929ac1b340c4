#pragma once

// Orientation and in-circle / in-sphere signs. Each predicate first evaluates
// in double precision against a forward error bound and falls back to exact
// rational arithmetic (GMP) when the sign is not certain.
//
// Conventions (row determinants of differences):
//   orient2d(a, b, c)       = det[a - c; b - c]            > 0: a, b, c counter-clockwise
//   incircle(a, b, c, d)    = det[a - d, |a - d|^2; ...]   > 0: d inside, given orient2d(a, b, c) > 0
//   orient3d(a, b, c, d)    = det[a - d; b - d; c - d]
//   insphere(a, b, c, d, e) = det[a - e, |a - e|^2; ...]   > 0: e inside, given orient3d(a, b, c, d) > 0

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <limits>

namespace ccshape::predicates {

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }
inline int sign_of(const mpq_class& v) { return sgn(v); }

template <class T>
T det3(const T& a0, const T& a1, const T& a2, const T& b0, const T& b1, const T& b2, const T& c0, const T& c1,
       const T& c2) {
  return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
}

}  // namespace detail

using Point2 = std::array<double, 2>;
using Point3 = std::array<double, 3>;

inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const double detleft = (a[0] - c[0]) * (b[1] - c[1]);
  const double detright = (a[1] - c[1]) * (b[0] - c[0]);
  const double det = detleft - detright;
  const double bound = (3.0 + 16.0 * detail::kEps) * detail::kEps * (std::abs(detleft) + std::abs(detright));
  if (std::abs(det) > bound) return detail::sign_of(det);
  const mpq_class acx = mpq_class(a[0]) - c[0], acy = mpq_class(a[1]) - c[1];
  const mpq_class bcx = mpq_class(b[0]) - c[0], bcy = mpq_class(b[1]) - c[1];
  return detail::sign_of(mpq_class(acx * bcy - acy * bcx));
}

inline int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = (10.0 + 96.0 * detail::kEps) * detail::kEps * permanent;
  if (std::abs(det) > bound) return detail::sign_of(det);
  const mpq_class ax = mpq_class(a[0]) - d[0], ay = mpq_class(a[1]) - d[1];
  const mpq_class bx = mpq_class(b[0]) - d[0], by = mpq_class(b[1]) - d[1];
  const mpq_class cx = mpq_class(c[0]) - d[0], cy = mpq_class(c[1]) - d[1];
  const mpq_class al = ax * ax + ay * ay, bl = bx * bx + by * by, cl = cx * cx + cy * cy;
  return detail::sign_of(detail::det3<mpq_class>(ax, ay, al, bx, by, bl, cx, cy, cl));
}

inline int orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1], adz = a[2] - d[2];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1], bdz = b[2] - d[2];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1], cdz = c[2] - d[2];
  const double bdycdz = bdy * cdz, bdzcdy = bdz * cdy;
  const double cdyadz = cdy * adz, cdzady = cdz * ady;
  const double adybdz = ady * bdz, adzbdy = adz * bdy;
  const double det = adx * (bdycdz - bdzcdy) + bdx * (cdyadz - cdzady) + cdx * (adybdz - adzbdy);
  const double permanent = (std::abs(bdycdz) + std::abs(bdzcdy)) * std::abs(adx) +
                           (std::abs(cdyadz) + std::abs(cdzady)) * std::abs(bdx) +
                           (std::abs(adybdz) + std::abs(adzbdy)) * std::abs(cdx);
  const double bound = (7.0 + 56.0 * detail::kEps) * detail::kEps * permanent;
  if (std::abs(det) > bound) return detail::sign_of(det);
  const mpq_class ax = mpq_class(a[0]) - d[0], ay = mpq_class(a[1]) - d[1], az = mpq_class(a[2]) - d[2];
  const mpq_class bx = mpq_class(b[0]) - d[0], by = mpq_class(b[1]) - d[1], bz = mpq_class(b[2]) - d[2];
  const mpq_class cx = mpq_class(c[0]) - d[0], cy = mpq_class(c[1]) - d[1], cz = mpq_class(c[2]) - d[2];
  return detail::sign_of(detail::det3<mpq_class>(ax, ay, az, bx, by, bz, cx, cy, cz));
}

namespace detail {

template <class T>
T insphere_det(const std::array<std::array<T, 4>, 4>& m) {
  // cofactor expansion along the lift column
  T det = 0;
  for (int r = 0; r < 4; ++r) {
    std::array<std::array<T, 3>, 3> minor;
    for (int rr = 0, k = 0; rr < 4; ++rr) {
      if (rr == r) continue;
      minor[k++] = {m[rr][0], m[rr][1], m[rr][2]};
    }
    const T d3 = det3<T>(minor[0][0], minor[0][1], minor[0][2], minor[1][0], minor[1][1], minor[1][2], minor[2][0],
                         minor[2][1], minor[2][2]);
    const T term = m[r][3] * d3;
    // sign of (r, 3) cofactor
    if ((r + 3) % 2 == 0) {
      det += term;
    } else {
      det -= term;
    }
  }
  return det;
}

}  // namespace detail

inline int insphere(const Point3& a, const Point3& b, const Point3& c, const Point3& d, const Point3& e) {
  const std::array<const Point3*, 4> pts{&a, &b, &c, &d};
  std::array<std::array<double, 4>, 4> m{};
  std::array<std::array<double, 4>, 4> am{};
  for (int r = 0; r < 4; ++r) {
    double lift = 0.0;
    for (int k = 0; k < 3; ++k) {
      m[r][k] = (*pts[r])[k] - e[k];
      am[r][k] = std::abs(m[r][k]);
      lift += m[r][k] * m[r][k];
    }
    m[r][3] = lift;
    am[r][3] = lift;
  }
  const double det = detail::insphere_det(m);
  // permanent-style magnitude: every product taken in absolute value
  double permanent = 0.0;
  for (int r = 0; r < 4; ++r) {
    std::array<std::array<double, 3>, 3> minor;
    for (int rr = 0, k = 0; rr < 4; ++rr) {
      if (rr == r) continue;
      minor[k++] = {am[rr][0], am[rr][1], am[rr][2]};
    }
    const auto& q = minor;
    const double p3 = q[0][0] * (q[1][1] * q[2][2] + q[1][2] * q[2][1]) +
                      q[0][1] * (q[1][0] * q[2][2] + q[1][2] * q[2][0]) +
                      q[0][2] * (q[1][0] * q[2][1] + q[1][1] * q[2][0]);
    permanent += am[r][3] * p3;
  }
  const double bound = 1e-12 * permanent;
  if (std::abs(det) > bound) return detail::sign_of(det);
  std::array<std::array<mpq_class, 4>, 4> q{};
  for (int r = 0; r < 4; ++r) {
    mpq_class lift = 0;
    for (int k = 0; k < 3; ++k) {
      q[r][k] = mpq_class((*pts[r])[k]) - e[k];
      lift += q[r][k] * q[r][k];
    }
    q[r][3] = lift;
  }
  return detail::sign_of(detail::insphere_det(q));
}

}  // namespace ccshape::predicates
