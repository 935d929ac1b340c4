#pragma once

// Central configurations as critical points of C on shape space.
//
// minimize_complexity   L-BFGS on C over gauge-fixed coordinates, Newton polish.
// find_critical_point   L-BFGS on G = |P grad C|^2 (grad G = 2 H P grad C), Newton polish;
//                       reaches saddles as well as minima.
// multi_start_search    seeded independent starts, deterministic aggregation and dedup.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ccshape/errors.hpp"
#include "ccshape/fingerprint.hpp"
#include "ccshape/hessian.hpp"
#include "ccshape/lbfgs.hpp"
#include "ccshape/shape_core.hpp"

namespace ccshape {

enum class Sampling { uniform_ball, jittered_lattice };
enum class SearchMode { minima, all_critical };

struct TargetBand {
  double lo = 1.0;
  double hi = 1.015;
  bool relative = true;  // bounds are multiples of the best C found
};

struct SolverConfig {
  int n = 3;
  int dim = 2;
  std::vector<double> masses;  // empty: equal masses 1/N
  Sampling sampling = Sampling::uniform_ball;
  std::uint64_t master_seed = 0;
  double grad_tol = 1e-10;
  int max_iterations = 50000;
  int starts = 1;
  // saddle targeting: perturbation scales around found minima, and number of such starts (0: same as `starts`)
  std::vector<double> saddle_sigmas{0.01, 0.03, 0.1};
  int saddle_starts = 0;
  int threads = 1;  // 0: hardware concurrency
  // above this many coordinates, spectra come from Lanczos and Newton polishing is skipped
  int dense_limit = 3000;

  void validate() const {
    if (n < 2) throw InvalidConfiguration("n: must be >= 2");
    if (dim != 2 && dim != 3) throw InvalidConfiguration("dim: must be 2 or 3");
    if (!masses.empty() && static_cast<int>(masses.size()) != n) {
      throw InvalidConfiguration("masses: expected n entries");
    }
    for (double m : masses) {
      if (!(m > 0.0)) throw InvalidConfiguration("masses: entries must be positive");
    }
    if (!(grad_tol > 0.0)) throw InvalidConfiguration("grad_tol: must be > 0");
    if (max_iterations < 1) throw InvalidConfiguration("max_iterations: must be >= 1");
    if (starts < 1) throw InvalidConfiguration("starts: must be >= 1");
    if (saddle_starts < 0) throw InvalidConfiguration("saddle_starts: must be >= 0");
    for (double s : saddle_sigmas) {
      if (!(s > 0.0)) throw InvalidConfiguration("saddle_sigmas: entries must be > 0");
    }
    if (threads < 0) throw InvalidConfiguration("threads: must be >= 0");
  }

  [[nodiscard]] std::vector<double> mass_vector() const {
    if (masses.empty()) return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
    return masses;
  }
};

struct Provenance {
  std::uint64_t seed = 0;
  int start_index = -1;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string method;  // "minimize" | "critical"
  double sigma = 0.0;  // perturbation scale of a saddle-targeting start, 0 otherwise
};

struct CriticalPoint {
  ShapeRepresentative shape;
  double complexity = 0.0;
  double residual = 0.0;
  int index = -1;  // -1: not classified (not converged)
  int zero_modes = 0;
  bool degenerate = false;  // zero-mode count differs from the gauge count
  bool converged = false;
  ShapeFingerprint fingerprint;
  Provenance provenance;

  [[nodiscard]] bool is_minimum() const { return converged && index == 0; }
};

struct Classification {
  int index = 0;
  int zero_modes = 0;
  bool degenerate = false;
  SpectrumSummary spectrum;
};

/// Index and zero-mode count of the gauge-projected Hessian. Dense
/// eigendecomposition up to `dense_limit` coordinates, Lanczos (20 smallest) above.
inline Classification classify_critical_point(const MassConfiguration& c, double grad_tol = 1e-10,
                                              int dense_limit = 3000) {
  const double r = cc_residual(c);
  if (!(r <= grad_tol)) throw NotCritical("residual " + std::to_string(r) + " exceeds tolerance");
  Classification out;
  const std::size_t nd = c.positions().size();
  const auto basis = gauge_basis(c.dim(), c.masses(), c.positions());
  if (basis.size() >= nd) {
    out.zero_modes = static_cast<int>(nd);
    out.spectrum.eigenvalues.assign(nd, 0.0);
    out.spectrum.zero_modes = out.zero_modes;
  } else if (static_cast<int>(nd) <= dense_limit) {
    out.spectrum = dense_spectrum(c);
  } else {
    out.spectrum = lanczos_spectrum(c);
  }
  out.index = out.spectrum.index;
  out.zero_modes = out.spectrum.zero_modes;
  out.degenerate = out.zero_modes != gauge_mode_count(c.dim());
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of start k; depends only on (master, k) so runs with more starts extend runs with fewer.
inline std::uint64_t start_seed(std::uint64_t master, std::uint64_t k) {
  return splitmix64(splitmix64(master) ^ (k * 0xd1b54a32d192ed03ULL + 1));
}

inline double max_particle_norm(int dim, const Eigen::VectorXd& d) {
  double best = 0.0;
  const Eigen::Index n = d.size() / dim;
  for (Eigen::Index i = 0; i < n; ++i) best = std::max(best, d.segment(i * dim, dim).norm());
  return best;
}

inline double projected_norm(int dim, std::span<const double> masses, std::span<const double> x,
                             std::vector<double> g) {
  const auto basis = gauge_basis(dim, masses, x);
  if (basis.size() >= x.size()) return 0.0;
  project_out(basis, g);
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

/// Shared plumbing for objectives living on the gauge slice (com = 0, l_rms = 1).
class GaugedObjective {
 public:
  GaugedObjective(int dim, std::vector<double> masses) : dim_(dim), masses_(std::move(masses)) {}

  void project(const Eigen::VectorXd& x, Eigen::VectorXd& d) const {
    const auto basis = gauge_basis(dim_, masses_, view(x));
    project_out(basis, std::span<double>(d.data(), static_cast<std::size_t>(d.size())));
  }

  /// Keeps every particle's move below a fraction of the current minimum separation.
  [[nodiscard]] double step_limit(const Eigen::VectorXd&, const Eigen::VectorXd& d) const {
    const double m = max_particle_norm(dim_, d);
    if (!(m > 0.0)) return 1.0;
    return 0.3 * min_sep_ / m;
  }

 protected:
  [[nodiscard]] std::span<const double> view(const Eigen::VectorXd& x) const {
    return {x.data(), static_cast<std::size_t>(x.size())};
  }
  double refix(Eigen::VectorXd& x) {
    const double s = gauge_fix_in_place(dim_, masses_, std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
    min_sep_ *= s;
    return s;
  }

  int dim_;
  std::vector<double> masses_;
  double min_sep_ = 1.0;  // of the most recent successful evaluation
};

/// f = C.
class ComplexityObjective : public GaugedObjective {
 public:
  ComplexityObjective(int dim, std::vector<double> masses, double tol)
      : GaugedObjective(dim, std::move(masses)), tol_(tol) {}

  std::optional<Evaluation> evaluate(const Eigen::VectorXd& x) {
    try {
      auto e = detail::evaluate(dim_, masses_, view(x), true);
      min_sep_ = e.sums.min_separation;
      Evaluation out;
      out.value = e.complexity;
      out.gradient = Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), static_cast<Eigen::Index>(e.gradient.size()));
      return out;
    } catch (const CollisionError&) {
      return std::nullopt;
    }
  }

  void retract(Eigen::VectorXd& x, Evaluation& e) {
    const double s = refix(x);
    e.gradient /= s;  // grad C is homogeneous of degree -1
  }

  bool done(const Eigen::VectorXd& x, const Evaluation& e) const {
    std::vector<double> g(e.gradient.data(), e.gradient.data() + e.gradient.size());
    return projected_norm(dim_, masses_, view(x), std::move(g)) / std::max(e.value, 1.0) <= tol_;
  }

 private:
  double tol_;
};

/// f = G = |P grad C|^2, grad G = 2 H P grad C. `aux` of the evaluation is not used;
/// C of the latest evaluation is kept for the residual normalization.
class GradientNormObjective : public GaugedObjective {
 public:
  GradientNormObjective(int dim, std::vector<double> masses, double tol, int stall_window)
      : GaugedObjective(dim, std::move(masses)), tol_(tol), stall_window_(stall_window) {}

  std::optional<Evaluation> evaluate(const Eigen::VectorXd& x) {
    try {
      auto e = detail::evaluate(dim_, masses_, view(x), true);
      min_sep_ = e.sums.min_separation;
      last_c_ = e.complexity;
      auto g = e.gradient;
      const auto basis = gauge_basis(dim_, masses_, view(x));
      project_out(basis, g);
      double gg = 0.0;
      for (double v : g) gg += v * v;
      auto hg = detail::hessian_vector_product(dim_, masses_, view(x), g, e);
      Evaluation out;
      out.value = gg;
      out.gradient = 2.0 * Eigen::Map<const Eigen::VectorXd>(hg.data(), static_cast<Eigen::Index>(hg.size()));
      return out;
    } catch (const CollisionError&) {
      return std::nullopt;
    }
  }

  void retract(Eigen::VectorXd& x, Evaluation& e) {
    const double s = refix(x);
    // G is homogeneous of degree -2
    e.value /= s * s;
    e.gradient /= s * s * s;
    accepted_c_ = last_c_;
  }

  bool done(const Eigen::VectorXd&, const Evaluation& e) {
    if (std::sqrt(std::max(e.value, 0.0)) / std::max(accepted_c_, 1.0) <= tol_) return true;
    if (e.value < 0.5 * mark_) {
      mark_ = e.value;
      since_ = 0;
    } else if (++since_ > stall_window_) {
      stalled_ = true;
      return true;
    }
    return false;
  }

  void set_tolerance(double tol) {
    tol_ = tol;
    stalled_ = false;
    since_ = 0;
    mark_ = std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] bool stalled() const { return stalled_; }

 private:
  double tol_;
  int stall_window_;
  double last_c_ = 0.0;
  double accepted_c_ = 0.0;
  double mark_ = std::numeric_limits<double>::infinity();
  int since_ = 0;
  bool stalled_ = false;
};

struct PolishOutcome {
  std::vector<double> x;
  double residual = INFINITY;
  int steps = 0;
};

/// Newton iteration on shape space using the pseudo-inverse of P H P (gauge and
/// near-null directions dropped). Steps are accepted only when the residual drops.
inline PolishOutcome newton_polish(const MassConfiguration& start, double target, int max_steps,
                                   bool require_minimum) {
  PolishOutcome out;
  out.x.assign(start.positions().begin(), start.positions().end());
  out.residual = cc_residual(start);
  const int dim = start.dim();
  for (int step = 0; step < max_steps && out.residual > target; ++step) {
    const auto cur = start.with_positions(out.x);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(projected_hessian(cur));
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double tau = kZeroModeRelTol * lam.cwiseAbs().maxCoeff();
    if (require_minimum && lam.minCoeff() < -tau) break;
    auto g = complexity_gradient(cur).values;
    const auto basis = gauge_basis(dim, cur.masses(), cur.positions());
    project_out(basis, g);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd coef = es.eigenvectors().transpose() * gv;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(gv.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      if (std::abs(lam[k]) > tau) s -= (coef[k] / lam[k]) * es.eigenvectors().col(k);
    }
    const double min_sep = complexity(cur).min_separation;
    const double disp = max_particle_norm(dim, s);
    double alpha = disp > 0.0 ? std::min(1.0, 0.2 * min_sep / disp) : 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 12 && !accepted; ++bt, alpha *= 0.5) {
      std::vector<double> xt(out.x);
      for (std::size_t k = 0; k < xt.size(); ++k) xt[k] += alpha * s[static_cast<Eigen::Index>(k)];
      try {
        gauge_fix_in_place(dim, cur.masses(), xt);
        const double rt = cc_residual(cur.with_positions(xt));
        if (rt < out.residual) {
          out.x = std::move(xt);
          out.residual = rt;
          accepted = true;
        }
      } catch (const CollisionError&) {
      }
    }
    if (!accepted) break;
    out.steps = step + 1;
  }
  return out;
}

/// Canonical two-body representative: on the first axis, com at origin, l_rms = 1.
inline MassConfiguration two_body_canonical(const MassConfiguration& c) {
  const double m1 = c.masses()[0];
  const double m2 = c.masses()[1];
  const double r = 1.0 / std::sqrt(m1 * m2);
  std::vector<double> x(static_cast<std::size_t>(2 * c.dim()), 0.0);
  x[0] = -m2 * r;
  x[static_cast<std::size_t>(c.dim())] = m1 * r;
  return c.with_positions(std::move(x));
}

inline CriticalPoint finish_point(const MassConfiguration& cfg_shape, const SolverConfig& cfg, Provenance prov) {
  CriticalPoint p;
  p.shape = gauge_fix(cfg_shape);
  const auto& c = p.shape.config;
  p.complexity = complexity(c).complexity;
  p.residual = cc_residual(c);
  p.converged = p.residual <= cfg.grad_tol;
  if (p.converged) {
    const auto cls = classify_critical_point(c, cfg.grad_tol, cfg.dense_limit);
    p.index = cls.index;
    p.zero_modes = cls.zero_modes;
    p.degenerate = cls.degenerate;
  }
  p.fingerprint = fingerprint(c);
  p.provenance = std::move(prov);
  return p;
}

inline Eigen::VectorXd to_eigen(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace detail

/// Descends C from `start`. A point that does not reach the residual tolerance
/// within the iteration cap is returned with converged == false.
/// `trace` receives C after every accepted line-search step.
inline CriticalPoint minimize_complexity(const MassConfiguration& start, const SolverConfig& cfg,
                                         std::vector<double>* trace = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  if (static_cast<int>(start.size()) != cfg.n || start.dim() != cfg.dim) {
    throw InvalidConfiguration("start does not match solver configuration (n, dim)");
  }
  Provenance prov;
  prov.method = "minimize";
  if (start.size() == 2) {
    return detail::finish_point(detail::two_body_canonical(start), cfg, prov);
  }
  const int dim = start.dim();
  const std::vector<double> masses(start.masses().begin(), start.masses().end());
  std::vector<double> x0(start.positions().begin(), start.positions().end());
  detail::gauge_fix_in_place(dim, masses, x0);

  detail::ComplexityObjective objective(dim, masses, cfg.grad_tol);
  LbfgsOptions opt;
  opt.max_iterations = cfg.max_iterations;
  auto res = lbfgs_minimize(objective, detail::to_eigen(x0), opt, trace);
  if (res.status == LbfgsStatus::collision) {
    throw CollisionError("line search backtracked into collisions repeatedly");
  }
  int iterations = res.iterations;
  std::vector<double> x(res.x.data(), res.x.data() + res.x.size());
  const bool dense = static_cast<int>(x.size()) <= cfg.dense_limit;

  if (res.status != LbfgsStatus::done) {
    if (dense) {
      auto pol = detail::newton_polish(start.with_positions(x), 1e-2 * cfg.grad_tol, 20, true);
      x = std::move(pol.x);
    }
    if (cc_residual(start.with_positions(x)) > cfg.grad_tol && iterations < cfg.max_iterations) {
      // C itself is flat to rounding here; continue on |grad C|^2, which is not.
      detail::GradientNormObjective gobj(dim, masses, cfg.grad_tol, 2000);
      LbfgsOptions gopt;
      gopt.max_iterations = cfg.max_iterations - iterations;
      auto gres = lbfgs_minimize(gobj, detail::to_eigen(x), gopt);
      iterations += gres.iterations;
      x.assign(gres.x.data(), gres.x.data() + gres.x.size());
      if (dense && cc_residual(start.with_positions(x)) > cfg.grad_tol) {
        x = detail::newton_polish(start.with_positions(x), 1e-2 * cfg.grad_tol, 20, false).x;
      }
    }
  } else if (dense) {
    // finish with margin below the tolerance
    x = detail::newton_polish(start.with_positions(x), 1e-2 * cfg.grad_tol, 3, true).x;
  }
  prov.iterations = iterations;
  prov.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return detail::finish_point(start.with_positions(std::move(x)), cfg, prov);
}

/// Converges to a nearby critical point of any index by descending |P grad C|^2.
/// Throws SpuriousMinimum when that descent stalls away from a critical point.
inline CriticalPoint find_critical_point(const MassConfiguration& start, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (static_cast<int>(start.size()) != cfg.n || start.dim() != cfg.dim) {
    throw InvalidConfiguration("start does not match solver configuration (n, dim)");
  }
  Provenance prov;
  prov.method = "critical";
  if (start.size() == 2) {
    return detail::finish_point(detail::two_body_canonical(start), cfg, prov);
  }
  const int dim = start.dim();
  const std::vector<double> masses(start.masses().begin(), start.masses().end());
  std::vector<double> x(start.positions().begin(), start.positions().end());
  detail::gauge_fix_in_place(dim, masses, x);
  // collision check on the start itself
  (void)complexity(start.with_positions(x));

  const bool dense = static_cast<int>(x.size()) <= cfg.dense_limit;
  double switch_tol = dense ? std::max(1e-4, cfg.grad_tol) : cfg.grad_tol;
  detail::GradientNormObjective objective(dim, masses, switch_tol, 2000);
  int iterations = 0;
  double residual = cc_residual(start.with_positions(x));
  while (residual > cfg.grad_tol) {
    if (iterations >= cfg.max_iterations) break;
    objective.set_tolerance(switch_tol);
    LbfgsOptions opt;
    opt.max_iterations = cfg.max_iterations - iterations;
    auto res = lbfgs_minimize(objective, detail::to_eigen(x), opt);
    if (res.status == LbfgsStatus::collision) {
      throw CollisionError("line search backtracked into collisions repeatedly");
    }
    iterations += res.iterations;
    x.assign(res.x.data(), res.x.data() + res.x.size());
    residual = cc_residual(start.with_positions(x));
    if (residual <= cfg.grad_tol) break;
    const bool stuck = objective.stalled() || res.status == LbfgsStatus::line_search_failed;
    if (dense) {
      auto pol = detail::newton_polish(start.with_positions(x), 1e-2 * cfg.grad_tol, 25, false);
      if (pol.residual <= cfg.grad_tol) {
        x = std::move(pol.x);
        residual = pol.residual;
        break;
      }
    }
    if (stuck) {
      throw SpuriousMinimum("gradient-norm descent stalled at residual " + std::to_string(residual));
    }
    if (res.status == LbfgsStatus::max_iterations) break;
    switch_tol = std::max(cfg.grad_tol, switch_tol * 1e-2);
  }
  prov.iterations = iterations;
  prov.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return detail::finish_point(start.with_positions(std::move(x)), cfg, prov);
}

/// Random initial configuration for start seed `seed`, gauge-fixed.
inline MassConfiguration random_start(const SolverConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const auto n = static_cast<std::size_t>(cfg.n);
  const auto d = static_cast<std::size_t>(cfg.dim);
  std::vector<double> x(n * d);
  if (cfg.sampling == Sampling::uniform_ball) {
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      do {
        r2 = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
          x[i * d + a] = uni(rng);
          r2 += x[i * d + a] * x[i * d + a];
        }
      } while (r2 > 1.0);
    }
  } else {
    // nearest lattice sites to the origin (triangular in 2D, simple cubic in 3D), jittered
    const int k = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d)))) + 2;
    std::vector<std::array<double, 3>> sites;
    for (int i = -k; i <= k; ++i) {
      for (int j = -k; j <= k; ++j) {
        if (d == 2) {
          sites.push_back({i + 0.5 * j, 0.5 * std::sqrt(3.0) * j, 0.0});
        } else {
          for (int l = -k; l <= k; ++l) sites.push_back({double(i), double(j), double(l)});
        }
      }
    }
    std::stable_sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
      return a[0] * a[0] + a[1] * a[1] + a[2] * a[2] < b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    });
    std::uniform_real_distribution<double> jit(-0.15, 0.15);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < d; ++a) x[i * d + a] = sites[i][a] + jit(rng);
    }
  }
  auto masses = cfg.mass_vector();
  detail::gauge_fix_in_place(cfg.dim, masses, x);
  return MassConfiguration(cfg.dim, std::move(masses), std::move(x));
}

/// Gaussian perturbation of scale sigma in gauge-fixed coordinates, re-gauge-fixed.
inline MassConfiguration perturb(const MassConfiguration& base, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  const auto fixed = gauge_fix(base).config;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<double> x(fixed.positions().begin(), fixed.positions().end());
    for (double& v : x) v += gauss(rng);
    try {
      detail::gauge_fix_in_place(fixed.dim(), fixed.masses(), x);
      auto out = fixed.with_positions(std::move(x));
      (void)complexity(out);
      return out;
    } catch (const CollisionError&) {
    }
  }
  throw CollisionError("could not draw a collision-free perturbation");
}

struct SearchSummary {
  std::vector<CriticalPoint> points;  // deduplicated, ascending (C, spectrum)
  double c_min_hat = INFINITY;
  int attempted = 0;
  int converged = 0;
  int failed = 0;      // exceptions and non-converged starts
  int duplicates = 0;  // converged starts merged into an existing class
  int out_of_band = 0;
};

/// Identity of two summaries, ignoring wall-clock provenance.
inline bool same_results(const SearchSummary& a, const SearchSummary& b) {
  if (a.points.size() != b.points.size() || a.attempted != b.attempted || a.converged != b.converged ||
      a.failed != b.failed || a.duplicates != b.duplicates || a.out_of_band != b.out_of_band) {
    return false;
  }
  if (!(a.c_min_hat == b.c_min_hat || (std::isinf(a.c_min_hat) && std::isinf(b.c_min_hat)))) return false;
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    const auto& p = a.points[k];
    const auto& q = b.points[k];
    const auto xp = p.shape.config.positions();
    const auto xq = q.shape.config.positions();
    if (!std::equal(xp.begin(), xp.end(), xq.begin(), xq.end())) return false;
    if (p.complexity != q.complexity || p.residual != q.residual || p.index != q.index ||
        p.zero_modes != q.zero_modes || p.provenance.seed != q.provenance.seed ||
        p.provenance.start_index != q.provenance.start_index || p.provenance.iterations != q.provenance.iterations) {
      return false;
    }
  }
  return true;
}

/// Union-find merge of matching fingerprints after a total-order sort, so the
/// result does not depend on the order in which `points` were produced.
inline std::vector<CriticalPoint> deduplicate(std::vector<CriticalPoint> points, int* duplicates = nullptr) {
  std::sort(points.begin(), points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (fingerprint_less(a.fingerprint, b.fingerprint)) return true;
    if (fingerprint_less(b.fingerprint, a.fingerprint)) return false;
    return a.provenance.start_index < b.provenance.start_index;
  });
  std::vector<std::size_t> parent(points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[j].complexity - points[i].complexity > ShapeFingerprint::kComplexityTol) break;
      if (points[i].fingerprint.matches(points[j].fingerprint)) {
        const auto a = find(i);
        const auto b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<CriticalPoint> reps;
  int dups = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (find(i) == i) {
      reps.push_back(std::move(points[i]));
    } else {
      ++dups;
    }
  }
  if (duplicates) *duplicates = dups;
  return reps;
}

namespace detail {

enum class StartKind { minimize, critical };

struct StartOutcome {
  std::optional<CriticalPoint> point;
  bool failed = false;
};

template <class Job>
std::vector<StartOutcome> run_starts(int count, int threads, Job job) {
  std::vector<StartOutcome> out(static_cast<std::size_t>(std::max(count, 0)));
  int workers = threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : threads;
  workers = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  auto body = [&] {
    for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
      auto& slot = out[static_cast<std::size_t>(k)];
      try {
        auto p = job(k);
        if (p.converged) {
          slot.point = std::move(p);
        } else {
          slot.failed = true;
        }
      } catch (const std::exception&) {
        slot.failed = true;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  return out;
}

inline void tally(std::vector<StartOutcome>& outcomes, SearchSummary& s, std::vector<CriticalPoint>& sink) {
  for (auto& o : outcomes) {
    ++s.attempted;
    if (o.point) {
      ++s.converged;
      sink.push_back(std::move(*o.point));
    } else {
      ++s.failed;
    }
  }
}

}  // namespace detail

/// Multi-start search. In all-critical mode with a target band, a minima phase
/// (cfg.starts) locates C_min first, then saddle starts perturb the found minima
/// with the configured sigmas; only points inside the band are retained.
inline SearchSummary multi_start_search(const SolverConfig& cfg, SearchMode mode,
                                        std::optional<TargetBand> band = std::nullopt) {
  cfg.validate();
  SearchSummary s;
  std::vector<CriticalPoint> found;
  const bool saddle_targeting = mode == SearchMode::all_critical && band.has_value();
  const bool first_phase_minimize = mode == SearchMode::minima || saddle_targeting;

  auto phase1 = detail::run_starts(cfg.starts, cfg.threads, [&](int k) {
    const auto seed = detail::start_seed(cfg.master_seed, static_cast<std::uint64_t>(k));
    const auto start = random_start(cfg, seed);
    auto p = first_phase_minimize ? minimize_complexity(start, cfg) : find_critical_point(start, cfg);
    p.provenance.seed = seed;
    p.provenance.start_index = k;
    return p;
  });
  detail::tally(phase1, s, found);

  if (saddle_targeting && !found.empty()) {
    int dummy = 0;
    const auto minima = deduplicate(found, &dummy);
    const int count = cfg.saddle_starts > 0 ? cfg.saddle_starts : cfg.starts;
    const int nmin = static_cast<int>(minima.size());
    const int nsig = static_cast<int>(cfg.saddle_sigmas.size());
    auto phase2 = detail::run_starts(count, cfg.threads, [&](int k) {
      const int index = cfg.starts + k;
      const auto seed = detail::start_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
      const auto& base = minima[static_cast<std::size_t>(k % nmin)];
      const double sigma = cfg.saddle_sigmas[static_cast<std::size_t>((k / nmin) % nsig)];
      const auto start = perturb(base.shape.config, sigma, seed);
      auto p = find_critical_point(start, cfg);
      p.provenance.seed = seed;
      p.provenance.start_index = index;
      p.provenance.sigma = sigma;
      return p;
    });
    detail::tally(phase2, s, found);
  }

  s.points = deduplicate(std::move(found), &s.duplicates);
  if (!s.points.empty()) s.c_min_hat = s.points.front().complexity;
  if (band) {
    const double scale = band->relative ? s.c_min_hat : 1.0;
    const double lo = band->lo * scale;
    const double hi = band->hi * scale;
    std::vector<CriticalPoint> kept;
    for (auto& p : s.points) {
      if (p.complexity >= lo && p.complexity <= hi) {
        kept.push_back(std::move(p));
      } else {
        ++s.out_of_band;
      }
    }
    s.points = std::move(kept);
    s.c_min_hat = s.points.empty() ? INFINITY : s.points.front().complexity;
  }
  return s;
}

/// Best C over a minima-mode search.
inline double estimate_c_min(const SolverConfig& cfg) {
  return multi_start_search(cfg, SearchMode::minima).c_min_hat;
}

}  // namespace ccshape
