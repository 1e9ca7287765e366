#ifndef GEOCONNECT_MINIMIZE_HPP
#define GEOCONNECT_MINIMIZE_HPP

// Limited-memory quasi-Newton descent with Armijo backtracking. Iterates
// that fail the feasibility predicate are rejected by halving the step;
// rejected trials count toward the iteration budget.

#include <deque>
#include <string>
#include <vector>

#include "geoconnect/linalg.hpp"

namespace geoconnect {

struct MinimizeOptions {
  double tol_grad = 1e-8;
  int max_iter = 5000;
  int memory = 10;
  double armijo = 1e-4;
};

struct MinimizeResult {
  std::vector<double> x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> f_trace;  // monotone nonincreasing value trace
};

template <class Objective, class Gradient, class Feasible>
MinimizeResult lbfgs_minimize(const Objective& objective, const Gradient& gradient,
                              const Feasible& feasible, std::vector<double> x0,
                              const MinimizeOptions& opts = {}) {
  const std::size_t n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  res.f = objective(res.x);
  res.f_trace.push_back(res.f);

  std::vector<double> g = gradient(res.x);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.iterations = iter + 1;
    res.grad_norm = norm2(g);
    if (res.grad_norm <= opts.tol_grad) {
      res.converged = true;
      res.stop_reason = "gradient tolerance reached";
      return res;
    }

    // two-loop recursion
    std::vector<double> dir = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      axpy(-alpha[k], y_hist[k], dir);
    }
    if (!s_hist.empty()) {
      const auto& sl = s_hist.back();
      const auto& yl = y_hist.back();
      const double scale = dot(sl, yl) / dot(yl, yl);
      for (double& v : dir) v *= scale;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      axpy(alpha[k] - beta, s_hist[k], dir);
    }
    for (double& v : dir) v = -v;

    double slope = dot(g, dir);
    if (slope >= 0.0) {  // fall back to steepest descent
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = dot(g, dir);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    bool accepted = false;
    std::vector<double> trial(n);
    double f_trial = 0.0;
    while (step >= 1e-14) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = res.x[i] + step * dir[i];
      if (feasible(trial)) {
        f_trial = objective(trial);
        if (f_trial <= res.f + opts.armijo * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line search failed";
      return res;
    }

    std::vector<double> g_trial = gradient(trial);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial[i] - res.x[i];
      y[i] = g_trial[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm2(s) * norm2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    res.x = std::move(trial);
    res.f = f_trial;
    res.f_trace.push_back(res.f);
    g = std::move(g_trial);
  }
  res.grad_norm = norm2(g);
  res.stop_reason = "iteration budget exhausted";
  return res;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_MINIMIZE_HPP
