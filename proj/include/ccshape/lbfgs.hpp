#pragma once

// Limited-memory BFGS with backtracking Armijo line search.
//
// The objective is described by a Problem type:
//
//   std::optional<Evaluation> evaluate(const Eigen::VectorXd& x);   // nullopt: infeasible (collision)
//   void project(const Eigen::VectorXd& x, Eigen::VectorXd& d);      // strip gauge components of d
//   double step_limit(const Eigen::VectorXd& x, const Eigen::VectorXd& d);  // largest admissible alpha
//   void retract(Eigen::VectorXd& x, Evaluation& e);                 // back onto the gauge slice
//   bool done(const Eigen::VectorXd& x, const Evaluation& e);        // stop criterion

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace ccshape {

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

template <class P>
concept LbfgsProblem = requires(P& p, const Eigen::VectorXd& cx, Eigen::VectorXd& x, Evaluation& e) {
  { p.evaluate(cx) } -> std::same_as<std::optional<Evaluation>>;
  p.project(cx, x);
  { p.step_limit(cx, cx) } -> std::convertible_to<double>;
  p.retract(x, e);
  { p.done(cx, std::as_const(e)) } -> std::convertible_to<bool>;
};

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 50000;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  int max_collision_backtracks = 5;
};

enum class LbfgsStatus { done, line_search_failed, max_iterations, collision };

struct LbfgsResult {
  Eigen::VectorXd x;
  Evaluation eval;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
};

/// `trace`, when given, receives the objective value after every accepted step
/// (starting with the initial value).
template <LbfgsProblem Problem>
LbfgsResult lbfgs_minimize(Problem& problem, Eigen::VectorXd x, const LbfgsOptions& opt,
                           std::vector<double>* trace = nullptr) {
  LbfgsResult res;
  auto first = problem.evaluate(x);
  if (!first) {
    res.x = std::move(x);
    res.status = LbfgsStatus::collision;
    return res;
  }
  Evaluation cur = std::move(*first);
  problem.retract(x, cur);
  if (trace) trace->push_back(cur.value);

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it;
    if (problem.done(x, cur)) {
      res.status = LbfgsStatus::done;
      res.x = std::move(x);
      res.eval = std::move(cur);
      return res;
    }

    // two-loop recursion
    Eigen::VectorXd d = -cur.gradient;
    const std::size_t k = s_hist.size();
    std::vector<double> alpha(k);
    for (std::size_t i = k; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (k > 0) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= gamma;
    } else {
      const double gn = cur.gradient.norm();
      if (gn > 0.0) d /= gn;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    problem.project(x, d);
    double slope = cur.gradient.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -cur.gradient;
      problem.project(x, d);
      const double gn = d.norm();
      if (gn > 0.0) d /= gn;
      slope = cur.gradient.dot(d);
      if (!(slope < 0.0)) {
        res.status = LbfgsStatus::line_search_failed;
        break;
      }
    }

    double step = std::min(1.0, problem.step_limit(x, d));
    int collisions = 0;
    bool accepted = false;
    Eigen::VectorXd trial;
    Evaluation next;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      trial = x + step * d;
      auto ev = problem.evaluate(trial);
      if (!ev) {
        if (++collisions >= opt.max_collision_backtracks) {
          res.status = LbfgsStatus::collision;
          res.x = std::move(x);
          res.eval = std::move(cur);
          return res;
        }
        step *= opt.backtrack;
        continue;
      }
      collisions = 0;
      if (ev->value <= cur.value + opt.armijo * step * slope) {
        next = std::move(*ev);
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      res.status = LbfgsStatus::line_search_failed;
      break;
    }

    problem.retract(trial, next);
    Eigen::VectorXd s = trial - x;
    Eigen::VectorXd y = next.gradient - cur.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(trial);
    cur = std::move(next);
    if (trace) trace->push_back(cur.value);
    res.iterations = it + 1;
    res.status = LbfgsStatus::max_iterations;
  }
  if (res.status != LbfgsStatus::line_search_failed) res.status = LbfgsStatus::max_iterations;
  if (problem.done(x, cur)) res.status = LbfgsStatus::done;
  res.x = std::move(x);
  res.eval = std::move(cur);
  return res;
}

}  // namespace ccshape
