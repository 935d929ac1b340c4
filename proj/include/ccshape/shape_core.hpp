#pragma once

// Complexity C = l_rms / l_mhl of an N-body mass configuration, its first and
// second derivatives, gauge handling (translations, rotations, dilation) and
// the central-configuration residual.
//
// Positions are stored flat, row-major: coordinate a of particle i lives at
// index i * dim + a.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccshape/errors.hpp"

namespace ccshape {

/// Neumaier compensated accumulator. Order of `add` calls fully determines the result.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Relative collision guard: separations below kCollisionGuard * l_rms are rejected.
inline constexpr double kCollisionGuard = 1e-10;

class MassConfiguration {
 public:
  MassConfiguration() = default;

  /// `positions` holds N * dim values. Masses are rescaled to sum to one; the
  /// applied factor is available from mass_rescale().
  MassConfiguration(int dim, std::vector<double> masses, std::vector<double> positions)
      : dim_(dim), masses_(std::move(masses)), positions_(std::move(positions)) {
    if (dim_ != 2 && dim_ != 3) {
      throw InvalidConfiguration("dimension must be 2 or 3, got " + std::to_string(dim_));
    }
    if (masses_.size() < 2) {
      throw InvalidConfiguration("need at least 2 particles, got " + std::to_string(masses_.size()));
    }
    if (positions_.size() != masses_.size() * static_cast<std::size_t>(dim_)) {
      throw InvalidConfiguration("positions size does not match N * dim");
    }
    CompensatedSum total;
    for (double m : masses_) {
      if (!(m > 0.0) || !std::isfinite(m)) throw InvalidConfiguration("masses must be positive and finite");
      total.add(m);
    }
    for (double x : positions_) {
      if (!std::isfinite(x)) throw InvalidConfiguration("positions must be finite");
    }
    const double t = total.value();
    // already normalised up to rounding: keep the given values bit for bit
    if (std::abs(t - 1.0) > 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(masses_.size())) {
      rescale_ = 1.0 / t;
      for (double& m : masses_) m *= rescale_;
    }
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        bool same = true;
        for (int a = 0; a < dim_; ++a) same = same && (coord(i, a) == coord(j, a));
        if (same) {
          throw CollisionError("particles " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
        }
      }
    }
  }

  static MassConfiguration equal_masses(int dim, std::vector<double> positions) {
    if (dim <= 0) throw InvalidConfiguration("dimension must be 2 or 3");
    const std::size_t n = positions.size() / static_cast<std::size_t>(dim);
    return MassConfiguration(dim, std::vector<double>(n, 1.0 / static_cast<double>(std::max<std::size_t>(n, 1))),
                             std::move(positions));
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return masses_.size(); }
  [[nodiscard]] std::span<const double> masses() const noexcept { return masses_; }
  [[nodiscard]] std::span<const double> positions() const noexcept { return positions_; }
  [[nodiscard]] double coord(std::size_t i, int a) const noexcept { return positions_[i * dim_ + a]; }
  [[nodiscard]] double mass_rescale() const noexcept { return rescale_; }

  /// Same masses, new positions (validated).
  [[nodiscard]] MassConfiguration with_positions(std::vector<double> positions) const {
    return MassConfiguration(dim_, masses_, std::move(positions));
  }

 private:
  int dim_ = 2;
  std::vector<double> masses_;
  std::vector<double> positions_;
  double rescale_ = 1.0;
};

struct ComplexityReport {
  double rms_length = 0.0;
  double mhl_length = 0.0;
  double complexity = 0.0;
  double min_separation = 0.0;
};

/// dC/dr_i for every particle, flat like positions.
struct GradientField {
  int dim = 2;
  std::vector<double> values;

  [[nodiscard]] double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

struct GaugeCertificate {
  double com_norm = 0.0;
  double rms_deviation = 0.0;
};

/// Gauge-fixed configuration: center of mass at the origin, l_rms = 1.
struct ShapeRepresentative {
  MassConfiguration config;
  GaugeCertificate certificate;
};

namespace detail {

struct PairSums {
  double inertia = 0.0;    // sum_{i<j} m_i m_j r_ij^2
  double potential = 0.0;  // sum_{i<j} m_i m_j / r_ij
  double min_separation = std::numeric_limits<double>::infinity();
};

inline PairSums pair_sums(int dim, std::span<const double> masses, std::span<const double> x) {
  const std::size_t n = masses.size();
  CompensatedSum inertia;
  CompensatedSum potential;
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &x[i * dim];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = &x[j * dim];
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = xi[a] - xj[a];
        r2 += d * d;
      }
      const double r = std::sqrt(r2);
      const double mm = masses[i] * masses[j];
      inertia.add(mm * r2);
      potential.add(mm / r);
      min_sep = std::min(min_sep, r);
    }
  }
  return {inertia.value(), potential.value(), min_sep};
}

inline void check_collision(const PairSums& s) {
  const double rms = std::sqrt(s.inertia);
  if (!(s.min_separation >= kCollisionGuard * rms) || s.min_separation == 0.0) {
    throw CollisionError("minimum separation below collision guard");
  }
}

inline std::vector<double> center_of_mass(int dim, std::span<const double> masses, std::span<const double> x) {
  std::vector<double> cm(dim, 0.0);
  for (std::size_t i = 0; i < masses.size(); ++i) {
    for (int a = 0; a < dim; ++a) cm[a] += masses[i] * x[i * dim + a];
  }
  return cm;
}

/// Value and gradient of C in one pass over the pairs.
struct PairEvaluation {
  PairSums sums;
  double rms = 0.0;
  double complexity = 0.0;
  std::vector<double> gradient;  // empty unless requested
  std::vector<double> force;     // f_i = sum_j m_j (x_i - x_j) / r_ij^3, when gradient requested
  std::vector<double> com;
};

inline PairEvaluation evaluate(int dim, std::span<const double> masses, std::span<const double> x, bool with_gradient) {
  PairEvaluation e;
  e.sums = pair_sums(dim, masses, x);
  check_collision(e.sums);
  e.rms = std::sqrt(e.sums.inertia);
  e.complexity = e.rms * e.sums.potential;
  if (!with_gradient) return e;

  const std::size_t n = masses.size();
  e.com = center_of_mass(dim, masses, x);
  e.force.assign(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &x[i * dim];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = &x[j * dim];
      double u[3];
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        u[a] = xi[a] - xj[a];
        r2 += u[a] * u[a];
      }
      const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
      for (int a = 0; a < dim; ++a) {
        e.force[i * dim + a] += masses[j] * u[a] * inv_r3;
        e.force[j * dim + a] -= masses[i] * u[a] * inv_r3;
      }
    }
  }
  const double vl = e.sums.potential / e.rms;
  e.gradient.resize(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      const std::size_t k = i * dim + a;
      e.gradient[k] = vl * masses[i] * (x[k] - e.com[a]) - e.rms * masses[i] * e.force[k];
    }
  }
  return e;
}

/// Analytic Hessian-vector product of C.
///   H = V H_l + grad l grad V^T + grad V grad l^T + l H_V,  H_l = H_I / (2l) - grad l grad l^T / l
inline std::vector<double> hessian_vector_product(int dim, std::span<const double> masses,
                                                  std::span<const double> x, std::span<const double> v,
                                                  const PairEvaluation& e) {
  const std::size_t n = masses.size();
  const double l = e.rms;
  const double V = e.sums.potential;

  std::vector<double> vbar(dim, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int a = 0; a < dim; ++a) vbar[a] += masses[k] * v[k * dim + a];
  }
  double gl_dot_v = 0.0;
  double gv_dot_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      const std::size_t k = i * dim + a;
      gl_dot_v += masses[i] * (x[k] - e.com[a]) / l * v[k];
      gv_dot_v += -masses[i] * e.force[k] * v[k];
    }
  }

  std::vector<double> out(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &x[i * dim];
    const double* vi = &v[i * dim];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = &x[j * dim];
      const double* vj = &v[j * dim];
      double u[3];
      double dv[3];
      double r2 = 0.0;
      double udv = 0.0;
      for (int a = 0; a < dim; ++a) {
        u[a] = xi[a] - xj[a];
        dv[a] = vi[a] - vj[a];
        r2 += u[a] * u[a];
        udv += u[a] * dv[a];
      }
      const double r = std::sqrt(r2);
      const double inv_r3 = 1.0 / (r2 * r);
      const double inv_r5 = inv_r3 / r2;
      const double mm = masses[i] * masses[j];
      for (int a = 0; a < dim; ++a) {
        const double b = mm * (3.0 * u[a] * udv * inv_r5 - dv[a] * inv_r3);
        out[i * dim + a] += b;
        out[j * dim + a] -= b;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      const std::size_t k = i * dim + a;
      const double gl = masses[i] * (x[k] - e.com[a]) / l;
      const double gv = -masses[i] * e.force[k];
      const double hl_v = masses[i] * (v[k] - vbar[a]) / l - gl * gl_dot_v / l;
      out[k] = l * out[k] + V * hl_v + gl * gv_dot_v + gv * gl_dot_v;
    }
  }
  return out;
}

}  // namespace detail

inline double rms_length(const MassConfiguration& c) {
  return std::sqrt(detail::pair_sums(c.dim(), c.masses(), c.positions()).inertia);
}

inline double mhl_length(const MassConfiguration& c) {
  const auto s = detail::pair_sums(c.dim(), c.masses(), c.positions());
  detail::check_collision(s);
  return 1.0 / s.potential;
}

inline ComplexityReport complexity(const MassConfiguration& c) {
  const auto s = detail::pair_sums(c.dim(), c.masses(), c.positions());
  detail::check_collision(s);
  const double rms = std::sqrt(s.inertia);
  return {rms, 1.0 / s.potential, rms * s.potential, s.min_separation};
}

inline GradientField complexity_gradient(const MassConfiguration& c) {
  auto e = detail::evaluate(c.dim(), c.masses(), c.positions(), true);
  return {c.dim(), std::move(e.gradient)};
}

/// H v, analytic.
inline std::vector<double> hessian_vector_product(const MassConfiguration& c, std::span<const double> direction) {
  if (direction.size() != c.positions().size()) throw InvalidConfiguration("direction size mismatch");
  const auto e = detail::evaluate(c.dim(), c.masses(), c.positions(), true);
  return detail::hessian_vector_product(c.dim(), c.masses(), c.positions(), direction, e);
}

/// H v by symmetric differences of the analytic gradient, step 1e-5 * max(1, |x|) / |v|.
inline std::vector<double> hessian_vector_product_fd(const MassConfiguration& c, std::span<const double> direction) {
  if (direction.size() != c.positions().size()) throw InvalidConfiguration("direction size mismatch");
  double xn = 0.0;
  double vn = 0.0;
  for (double x : c.positions()) xn += x * x;
  for (double v : direction) vn += v * v;
  xn = std::sqrt(xn);
  vn = std::sqrt(vn);
  std::vector<double> out(direction.size(), 0.0);
  if (vn == 0.0) return out;
  const double h = 1e-5 * std::max(1.0, xn) / vn;
  std::vector<double> xp(c.positions().begin(), c.positions().end());
  std::vector<double> xm = xp;
  for (std::size_t k = 0; k < xp.size(); ++k) {
    xp[k] += h * direction[k];
    xm[k] -= h * direction[k];
  }
  const auto gp = detail::evaluate(c.dim(), c.masses(), xp, true).gradient;
  const auto gm = detail::evaluate(c.dim(), c.masses(), xm, true).gradient;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (gp[k] - gm[k]) / (2.0 * h);
  return out;
}

/// Orthonormal basis (modified Gram-Schmidt) of the gauge directions at x:
/// dim translations, dim(dim-1)/2 rotations about the center of mass, one dilation.
/// Generators whose residual norm drops below 1e-12 are dropped.
inline std::vector<std::vector<double>> gauge_basis(int dim, std::span<const double> masses,
                                                    std::span<const double> x) {
  const std::size_t n = masses.size();
  const std::size_t len = n * dim;
  const auto cm = detail::center_of_mass(dim, masses, x);
  std::vector<std::vector<double>> gens;
  for (int a = 0; a < dim; ++a) {
    std::vector<double> t(len, 0.0);
    for (std::size_t i = 0; i < n; ++i) t[i * dim + a] = 1.0;
    gens.push_back(std::move(t));
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      std::vector<double> r(len, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        r[i * dim + a] = -(x[i * dim + b] - cm[b]);
        r[i * dim + b] = x[i * dim + a] - cm[a];
      }
      gens.push_back(std::move(r));
    }
  }
  {
    std::vector<double> s(len);
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < dim; ++a) s[i * dim + a] = x[i * dim + a] - cm[a];
    }
    gens.push_back(std::move(s));
  }

  std::vector<std::vector<double>> basis;
  for (auto& g : gens) {
    double n0 = 0.0;
    for (double v : g) n0 += v * v;
    n0 = std::sqrt(n0);
    if (n0 < 1e-300) continue;
    for (double& v : g) v /= n0;
    for (const auto& q : basis) {
      double d = 0.0;
      for (std::size_t k = 0; k < len; ++k) d += q[k] * g[k];
      for (std::size_t k = 0; k < len; ++k) g[k] -= d * q[k];
    }
    double nr = 0.0;
    for (double v : g) nr += v * v;
    nr = std::sqrt(nr);
    if (nr < 1e-12) continue;
    for (double& v : g) v /= nr;
    basis.push_back(std::move(g));
  }
  return basis;
}

/// Removes the components of v along an orthonormal basis (modified Gram-Schmidt order).
inline void project_out(const std::vector<std::vector<double>>& basis, std::span<double> v) {
  for (const auto& q : basis) {
    double d = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) d += q[k] * v[k];
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= d * q[k];
  }
}

/// |P grad C| / max(C, 1), P the projector onto the complement of the gauge directions.
inline double cc_residual(const MassConfiguration& c) {
  auto e = detail::evaluate(c.dim(), c.masses(), c.positions(), true);
  const auto basis = gauge_basis(c.dim(), c.masses(), c.positions());
  if (basis.size() >= c.positions().size()) return 0.0;
  project_out(basis, e.gradient);
  double s = 0.0;
  for (double v : e.gradient) s += v * v;
  return std::sqrt(s) / std::max(e.complexity, 1.0);
}

namespace detail {

/// Translate the center of mass to the origin and scale to l_rms = 1, in place.
/// Returns the scale factor applied.
inline double gauge_fix_in_place(int dim, std::span<const double> masses, std::span<double> x) {
  const auto cm = center_of_mass(dim, masses, x);
  const std::size_t n = masses.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) x[i * dim + a] -= cm[a];
  }
  // about the center of mass (sum m = 1): l_rms^2 = sum_i m_i |x_i|^2
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += x[i * dim + a] * x[i * dim + a];
    acc.add(masses[i] * r2);
  }
  const double rms = std::sqrt(acc.value());
  if (!(rms > 0.0)) throw CollisionError("all particles coincide");
  const double s = 1.0 / rms;
  if (s != 1.0) {
    for (double& v : x) v *= s;
  }
  return s;
}

inline GaugeCertificate certify(int dim, std::span<const double> masses, std::span<const double> x) {
  const auto cm = center_of_mass(dim, masses, x);
  double c2 = 0.0;
  for (double v : cm) c2 += v * v;
  const double rms = std::sqrt(pair_sums(dim, masses, x).inertia);
  return {std::sqrt(c2), std::abs(rms - 1.0)};
}

}  // namespace detail

inline ShapeRepresentative gauge_fix(const MassConfiguration& c) {
  std::vector<double> x(c.positions().begin(), c.positions().end());
  // Already gauge-fixed inputs are returned untouched.
  const auto cert0 = detail::certify(c.dim(), c.masses(), x);
  if (cert0.com_norm <= 1e-15 && cert0.rms_deviation <= 1e-15) return {c, cert0};
  detail::gauge_fix_in_place(c.dim(), c.masses(), x);
  auto fixed = c.with_positions(std::move(x));
  auto cert = detail::certify(fixed.dim(), fixed.masses(), fixed.positions());
  return {std::move(fixed), cert};
}

}  // namespace ccshape
