#pragma once

// Second-order information on shape space: dense analytic Hessian, the
// gauge-projected spectrum (dense or Lanczos), and index / zero-mode counting.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ccshape/shape_core.hpp"

namespace ccshape {

/// Dense analytic Hessian of C (Nd x Nd).
inline Eigen::MatrixXd dense_hessian(const MassConfiguration& c) {
  const int dim = c.dim();
  const auto m = c.masses();
  const auto x = c.positions();
  const std::size_t n = c.size();
  const auto nd = static_cast<Eigen::Index>(n * dim);
  const auto e = detail::evaluate(dim, m, x, true);
  const double l = e.rms;
  const double V = e.sums.potential;

  Eigen::VectorXd gl(nd);
  Eigen::VectorXd gv(nd);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      const auto k = static_cast<Eigen::Index>(i * dim + a);
      gl[k] = m[i] * (x[k] - e.com[a]) / l;
      gv[k] = -m[i] * e.force[k];
    }
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nd, nd);
  // l * H_V
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double u[3];
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        u[a] = x[i * dim + a] - x[j * dim + a];
        r2 += u[a] * u[a];
      }
      const double r = std::sqrt(r2);
      const double inv_r3 = 1.0 / (r2 * r);
      const double inv_r5 = inv_r3 / r2;
      const double mm = l * m[i] * m[j];
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          const double blk = mm * (3.0 * u[a] * u[b] * inv_r5 - (a == b ? inv_r3 : 0.0));
          const auto ia = static_cast<Eigen::Index>(i * dim + a);
          const auto ib = static_cast<Eigen::Index>(i * dim + b);
          const auto ja = static_cast<Eigen::Index>(j * dim + a);
          const auto jb = static_cast<Eigen::Index>(j * dim + b);
          h(ia, ib) += blk;
          h(ja, jb) += blk;
          h(ia, jb) -= blk;
          h(ja, ib) -= blk;
        }
      }
    }
  }
  // V * H_I / (2l): block (i,k) = m_i (delta_ik - m_k) I / l
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double coef = V * m[i] * ((i == k ? 1.0 : 0.0) - m[k]) / l;
      for (int a = 0; a < dim; ++a) {
        h(static_cast<Eigen::Index>(i * dim + a), static_cast<Eigen::Index>(k * dim + a)) += coef;
      }
    }
  }
  h.noalias() -= (V / l) * gl * gl.transpose();
  h.noalias() += gl * gv.transpose();
  h.noalias() += gv * gl.transpose();
  // symmetrize away accumulation noise
  h = 0.5 * (h + h.transpose()).eval();
  return h;
}

inline Eigen::MatrixXd gauge_basis_matrix(const MassConfiguration& c) {
  const auto basis = gauge_basis(c.dim(), c.masses(), c.positions());
  Eigen::MatrixXd q(static_cast<Eigen::Index>(c.positions().size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    for (std::size_t k = 0; k < basis[b].size(); ++k) {
      q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)) = basis[b][k];
    }
  }
  return q;
}

/// P H P with P = I - Q Q^T.
inline Eigen::MatrixXd projected_hessian(const MassConfiguration& c) {
  Eigen::MatrixXd h = dense_hessian(c);
  const Eigen::MatrixXd q = gauge_basis_matrix(c);
  // (I - QQ^T) H (I - QQ^T) with thin Q
  const Eigen::MatrixXd hq = h * q;
  const Eigen::MatrixXd qhq = q.transpose() * hq;
  h.noalias() -= hq * q.transpose();
  h.noalias() -= q * hq.transpose();
  h.noalias() += q * (qhq * q.transpose());
  return 0.5 * (h + h.transpose());
}

struct SpectrumSummary {
  int index = 0;       // eigenvalues < -tau_e
  int zero_modes = 0;  // eigenvalues in [-tau_e, tau_e]
  double tau_e = 0.0;
  std::vector<double> eigenvalues;  // ascending; all of them (dense) or the smallest ones (Lanczos)
  bool iterative = false;
};

inline constexpr double kZeroModeRelTol = 1e-7;

inline SpectrumSummary count_modes(std::vector<double> eigenvalues, double max_abs, bool iterative) {
  SpectrumSummary s;
  std::sort(eigenvalues.begin(), eigenvalues.end());
  s.tau_e = kZeroModeRelTol * max_abs;
  for (double v : eigenvalues) {
    if (v < -s.tau_e) {
      ++s.index;
    } else if (v <= s.tau_e) {
      ++s.zero_modes;
    }
  }
  s.eigenvalues = std::move(eigenvalues);
  s.iterative = iterative;
  return s;
}

inline SpectrumSummary dense_spectrum(const MassConfiguration& c) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected_hessian(c), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  std::vector<double> vals(ev.data(), ev.data() + ev.size());
  double max_abs = 0.0;
  for (double v : vals) max_abs = std::max(max_abs, std::abs(v));
  return count_modes(std::move(vals), max_abs, false);
}

/// Smallest `wanted` eigenvalues of P H P by Lanczos with full reorthogonalization,
/// started inside the shape tangent space. Gauge directions are exact zero modes and
/// are added to the zero-mode count without being iterated on.
inline SpectrumSummary lanczos_spectrum(const MassConfiguration& c, int wanted = 20, int max_steps = 300,
                                        std::uint64_t seed = 0x5eedULL) {
  const int dim = c.dim();
  const auto m = c.masses();
  const auto x = c.positions();
  const auto e = detail::evaluate(dim, m, x, true);
  const auto basis = gauge_basis(dim, m, x);
  const std::size_t n = x.size();
  const std::size_t shape_dim = n - basis.size();
  const int steps = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(max_steps), shape_dim));

  auto apply = [&](std::vector<double> v) {
    project_out(basis, v);
    auto hv = detail::hessian_vector_product(dim, m, x, v, e);
    project_out(basis, hv);
    return hv;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> q(n);
  for (double& v : q) v = gauss(rng);
  project_out(basis, q);
  const double q0 = std::sqrt(dot(q, q));
  for (double& v : q) v /= q0;

  std::vector<std::vector<double>> krylov{q};
  std::vector<double> alpha;
  std::vector<double> beta;
  for (int it = 0; it < steps; ++it) {
    auto w = apply(krylov.back());
    const double a = dot(w, krylov.back());
    alpha.push_back(a);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& qk : krylov) {
        const double d = dot(w, qk);
        for (std::size_t k = 0; k < n; ++k) w[k] -= d * qk[k];
      }
      project_out(basis, w);
    }
    const double b = std::sqrt(dot(w, w));
    if (it + 1 == steps || b < 1e-13 * std::max(1.0, std::abs(a))) break;
    beta.push_back(b);
    for (double& v : w) v /= b;
    krylov.push_back(std::move(w));
  }

  const auto k = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k) {
      t(i, i + 1) = beta[static_cast<std::size_t>(i)];
      t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) max_abs = std::max(max_abs, std::abs(ev[i]));
  std::vector<double> smallest(ev.data(), ev.data() + std::min<Eigen::Index>(ev.size(), wanted));
  auto s = count_modes(std::move(smallest), max_abs, true);
  s.zero_modes += static_cast<int>(basis.size());
  std::vector<double> with_gauge(basis.size(), 0.0);
  with_gauge.insert(with_gauge.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  std::sort(with_gauge.begin(), with_gauge.end());
  s.eigenvalues = std::move(with_gauge);
  return s;
}

/// Expected number of gauge zero modes in dimension d.
constexpr int gauge_mode_count(int dim) { return dim + dim * (dim - 1) / 2 + 1; }

}  // namespace ccshape
