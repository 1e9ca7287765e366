#ifndef GEOCONNECT_GEODESIC_HPP
#define GEOCONNECT_GEODESIC_HPP

// Geodesic equations of the split metric, resolved for the coordinate
// accelerations:
//
//   D_s xdot - tdot F(x)[xdot] + tddot delta(x) + 1/2 tdot^2 grad beta = 0
//   d/ds ( beta_eff tdot - <delta(x), xdot> ) = 0
//
// For stationary systems (beta_eff > 0) the second equation is integrated
// in its conserved form: tdot is recovered algebraically from the Killing
// constant fixed by the initial state, which removes one source of drift.
// For the lightlike system (beta == 0) tdot carries its own second-order
// equation and <delta, xdot> is the conserved quantity.

#include <cmath>
#include <vector>

#include "geoconnect/action.hpp"
#include "geoconnect/path.hpp"
#include "geoconnect/spacetime.hpp"

namespace geoconnect {

inline constexpr double kConservationTol = 1e-7;

enum class GeodesicSystem { stationary, lightlike };

struct Accel {
  Vec xdd;
  double tdd = 0.0;
};

// Accelerations for an explicit state (x, xdot, tdot). The scalar equation
// for tddot comes from substituting the first equation into the derivative
// of the conserved quantity; its denominator beta_eff + |delta|^2 is
// positive whenever the assembled metric is Lorentzian.
inline Accel geodesic_accel(const SpacetimeModel& model, std::span<const double> x,
                            std::span<const double> xdot, double tdot, GeodesicSystem system) {
  const MetricModel& base = model.base();
  const int d = base.dimension();

  Vec cov(static_cast<std::size_t>(d), 0.0);
  if (!base.identity_metric()) {
    const Tensor3 gamma = base.christoffel(x);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          s += gamma[static_cast<std::size_t>(i)](j, k) * xdot[static_cast<std::size_t>(j)] *
               xdot[static_cast<std::size_t>(k)];
      cov[static_cast<std::size_t>(i)] = s;
    }
  }

  const Vec delta = base.delta(x);
  const Vec db = base.delta_lowered(x);
  const Vec curl = base.curl_operator(x, xdot);
  const Mat jac = base.delta_lowered_jacobian(x);

  double ddelta = 0.0;  // d/ds <delta, xdot> minus the acceleration term
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      ddelta += jac(i, j) * xdot[static_cast<std::size_t>(j)] * xdot[static_cast<std::size_t>(i)];

  const double delta2 = dot(db, delta);
  double numerator = ddelta - dot(db, cov) + tdot * dot(db, curl);
  double denominator = delta2;

  Vec gradb;
  double dbeta_dt = 0.0;
  if (system == GeodesicSystem::stationary) {
    const double beff = model.beta_eff(x);
    if (beff <= kBetaFloor)
      throw Error("stationary system needs beta_eff > 0 along the trajectory");
    gradb = base.beta_gradient(x);
    const Vec gblow = base.beta_gradient_lowered(x);
    dbeta_dt = dot(gblow, xdot);
    numerator += -0.5 * tdot * tdot * dot(db, gradb) - dbeta_dt * tdot;
    denominator += beff;
  } else {
    if (delta2 <= 1e-12) throw Error("lightlike system needs a non-vanishing delta");
  }

  Accel out;
  out.tdd = numerator / denominator;
  out.xdd.assign(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    double v = -cov[static_cast<std::size_t>(i)] + tdot * curl[static_cast<std::size_t>(i)] -
               out.tdd * delta[static_cast<std::size_t>(i)];
    if (system == GeodesicSystem::stationary)
      v -= 0.5 * tdot * tdot * gradb[static_cast<std::size_t>(i)];
    out.xdd[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

struct GeodesicSolution {
  std::vector<double> s;
  std::vector<Vec> x;
  std::vector<Vec> xdot;
  std::vector<double> t;
  std::vector<double> tdot;
  GeodesicSystem system = GeodesicSystem::stationary;

  double energy = 0.0;           // <zdot, zdot>_L at s = 0
  double killing = 0.0;          // <zdot, K>_L at s = 0
  double energy_drift = 0.0;
  double killing_drift = 0.0;
  double step_halving_error = 0.0;
  double residual = 0.0;         // second-difference residual of the samples
  int steps = 0;
  bool conservation_flag = false;  // drift exceeded kConservationTol
  bool left_domain = false;

  DiscretePath as_path() const {
    DiscretePath p;
    p.nodes = x;
    p.t_nodes = t;
    return p;
  }
};

namespace detail {

// One RK4 step of the flat state vector; `deriv` writes dy/ds.
template <class Deriv>
void rk4_step(const Deriv& deriv, std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  deriv(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  deriv(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  deriv(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  deriv(tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Step that splits at piecewise-field seams: if a coordinate crosses a seam
// hyperplane within the step, the step is re-taken up to the estimated
// crossing and continued from there, so each sub-step sees a smooth field.
template <class Deriv>
void seam_aware_step(const Deriv& deriv, const std::vector<Seam>& seams, std::vector<double>& y,
                     double h, int depth = 0) {
  std::vector<double> trial = y;
  rk4_step(deriv, trial, h);
  if (depth < 6) {
    double first_theta = 1.0;
    for (const Seam& seam : seams) {
      const double a = y[static_cast<std::size_t>(seam.axis)] - seam.value;
      const double b = trial[static_cast<std::size_t>(seam.axis)] - seam.value;
      if (a == 0.0 || b == 0.0 || (a < 0) == (b < 0)) continue;
      const double theta = a / (a - b);
      if (theta > 1e-3 && theta < 1.0 - 1e-3) first_theta = std::min(first_theta, theta);
    }
    if (first_theta < 1.0) {
      seam_aware_step(deriv, seams, y, first_theta * h, depth + 1);
      seam_aware_step(deriv, seams, y, (1.0 - first_theta) * h, depth + 1);
      return;
    }
  }
  y = trial;
}

}  // namespace detail

// Classic fixed-step 4th-order integration over s in [0, 1] with a
// step-halving self-check. Conservation violations are flagged, not fatal.
inline GeodesicSolution integrate(const SpacetimeModel& model, const Vec& x0, const Vec& xdot0,
                                  double t0, double tdot0, GeodesicSystem system,
                                  double h_ode = 1e-3, bool error_estimate = true) {
  const MetricModel& base = model.base();
  const int d = base.dimension();
  const bool stationary = system == GeodesicSystem::stationary;
  const std::vector<Seam> seams = base.seams();

  // Killing constant of the conserved-form time equation.
  const double q0 = stationary
                        ? model.beta_eff(x0) * tdot0 - dot(base.delta_lowered(x0), xdot0)
                        : 0.0;

  auto unpack_tdot = [&](const std::vector<double>& y) {
    if (!stationary) return y[static_cast<std::size_t>(2 * d + 1)];
    const std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    const std::span<const double> v(y.data() + d, static_cast<std::size_t>(d));
    return (q0 + dot(base.delta_lowered(x), v)) / model.beta_eff(x);
  };

  auto deriv = [&](const std::vector<double>& y, std::vector<double>& dy) {
    const std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    const std::span<const double> v(y.data() + d, static_cast<std::size_t>(d));
    const double tdot = unpack_tdot(y);
    const Accel acc = geodesic_accel(model, x, v, tdot, system);
    for (int i = 0; i < d; ++i) {
      dy[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
      dy[static_cast<std::size_t>(d + i)] = acc.xdd[static_cast<std::size_t>(i)];
    }
    dy[static_cast<std::size_t>(2 * d)] = tdot;
    if (!stationary) dy[static_cast<std::size_t>(2 * d + 1)] = acc.tdd;
  };

  const int steps = std::max(1, static_cast<int>(std::llround(1.0 / h_ode)));
  auto run = [&](int nsteps, GeodesicSolution* sol) -> std::vector<std::vector<double>> {
    std::vector<double> y(static_cast<std::size_t>(stationary ? 2 * d + 1 : 2 * d + 2));
    for (int i = 0; i < d; ++i) {
      y[static_cast<std::size_t>(i)] = x0[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(d + i)] = xdot0[static_cast<std::size_t>(i)];
    }
    y[static_cast<std::size_t>(2 * d)] = t0;
    if (!stationary) y[static_cast<std::size_t>(2 * d + 1)] = tdot0;

    std::vector<std::vector<double>> states;
    states.reserve(static_cast<std::size_t>(nsteps + 1));
    states.push_back(y);
    const double h = 1.0 / nsteps;
    for (int k = 0; k < nsteps; ++k) {
      const Vec prev(y.begin(), y.begin() + d);
      detail::seam_aware_step(deriv, seams, y, h);
      const Vec cur(y.begin(), y.begin() + d);
      if (!base.in_domain(cur) || !base.segment_in_domain(prev, cur)) {
        if (sol) sol->left_domain = true;
        break;
      }
      states.push_back(y);
    }
    return states;
  };

  GeodesicSolution sol;
  sol.system = system;
  const auto states = run(steps, &sol);
  sol.steps = static_cast<int>(states.size()) - 1;

  sol.s.reserve(states.size());
  sol.x.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& y = states[k];
    sol.s.push_back(static_cast<double>(k) / steps);
    sol.x.emplace_back(y.begin(), y.begin() + d);
    sol.xdot.emplace_back(y.begin() + d, y.begin() + 2 * d);
    sol.t.push_back(y[static_cast<std::size_t>(2 * d)]);
    sol.tdot.push_back(unpack_tdot(y));
  }

  // conserved quantities along the samples
  for (std::size_t k = 0; k < sol.x.size(); ++k) {
    const SpacetimeVector zdot{sol.xdot[k], sol.tdot[k]};
    const double e = model.lorentz_inner(sol.x[k], zdot, zdot);
    const double c = model.killing_pairing(sol.x[k], zdot);
    if (k == 0) {
      sol.energy = e;
      sol.killing = c;
    }
    sol.energy_drift = std::max(sol.energy_drift, std::fabs(e - sol.energy));
    sol.killing_drift = std::max(sol.killing_drift, std::fabs(c - sol.killing));
  }
  sol.conservation_flag =
      sol.energy_drift > kConservationTol || sol.killing_drift > kConservationTol;

  if (error_estimate && !sol.left_domain) {
    const auto fine = run(2 * steps, nullptr);
    double worst = 0.0;
    const std::size_t common = std::min(states.size(), (fine.size() + 1) / 2);
    for (std::size_t k = 0; k < common; ++k) {
      const auto& a = states[k];
      const auto& b = fine[2 * k];
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    sol.step_halving_error = worst;
  }
  return sol;
}

// Second-difference residual of the geodesic equations on a sampled curve
// with time values; the max norm over interior nodes and equations.
inline double geodesic_residual(const SpacetimeModel& model, const DiscretePath& path,
                                GeodesicSystem system) {
  if (!path.has_time()) throw Error("geodesic_residual needs time values");
  const int m = path.segments();
  if (m < 8) throw Error("geodesic_residual needs at least 8 segments");
  const MetricModel& base = model.base();
  const int d = base.dimension();
  const double h = path.h();
  double worst = 0.0;
  for (int i = 1; i < m; ++i) {
    const Vec& xm = path.nodes[static_cast<std::size_t>(i - 1)];
    const Vec& xc = path.nodes[static_cast<std::size_t>(i)];
    const Vec& xp = path.nodes[static_cast<std::size_t>(i + 1)];
    Vec xdot(static_cast<std::size_t>(d)), xdd(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      xdot[static_cast<std::size_t>(a)] =
          (xp[static_cast<std::size_t>(a)] - xm[static_cast<std::size_t>(a)]) / (2 * h);
      xdd[static_cast<std::size_t>(a)] =
          (xp[static_cast<std::size_t>(a)] - 2 * xc[static_cast<std::size_t>(a)] +
           xm[static_cast<std::size_t>(a)]) /
          (h * h);
    }
    const double tdot = (path.t_nodes[static_cast<std::size_t>(i + 1)] -
                         path.t_nodes[static_cast<std::size_t>(i - 1)]) /
                        (2 * h);
    const double tdd = (path.t_nodes[static_cast<std::size_t>(i + 1)] -
                        2 * path.t_nodes[static_cast<std::size_t>(i)] +
                        path.t_nodes[static_cast<std::size_t>(i - 1)]) /
                       (h * h);

    const Accel acc = geodesic_accel(model, xc, xdot, tdot, system);
    for (int a = 0; a < d; ++a)
      worst = std::max(worst, std::fabs(xdd[static_cast<std::size_t>(a)] -
                                        acc.xdd[static_cast<std::size_t>(a)]));
    worst = std::max(worst, std::fabs(tdd - acc.tdd));
  }
  return worst;
}

struct ShootResult {
  bool converged = false;
  GeodesicSolution solution;
  int iterations = 0;
  double endpoint_error = std::numeric_limits<double>::infinity();
  double jacobian_condition = 0.0;
};

// Damped-Newton shooting on the endpoint map v -> (x(1), t(1)) with a
// finite-difference Jacobian. Stagnation is reported, never fatal.
inline ShootResult shoot(const SpacetimeModel& model, const EndpointPair& endpoints,
                         GeodesicSystem system, Vec guess_xdot, double guess_tdot,
                         double tol_bvp = 1e-8, int max_iter = 100, double h_ode = 1e-3) {
  const int d = model.dimension();
  const int n = d + 1;
  Vec v(static_cast<std::size_t>(n));
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = guess_xdot[static_cast<std::size_t>(i)];
  v[static_cast<std::size_t>(d)] = guess_tdot;

  auto propagate = [&](const Vec& vel, bool estimate) {
    const Vec xd(vel.begin(), vel.begin() + d);
    return integrate(model, endpoints.xp, xd, endpoints.tp, vel[static_cast<std::size_t>(d)],
                     system, h_ode, estimate);
  };
  auto endpoint_residual = [&](const GeodesicSolution& sol, Vec& r) {
    if (sol.left_domain || sol.x.empty()) return false;
    for (int i = 0; i < d; ++i)
      r[static_cast<std::size_t>(i)] = sol.x.back()[static_cast<std::size_t>(i)] -
                                       endpoints.xq[static_cast<std::size_t>(i)];
    r[static_cast<std::size_t>(d)] = sol.t.back() - endpoints.tq;
    return true;
  };

  ShootResult out;
  Vec r(static_cast<std::size_t>(n));
  GeodesicSolution sol;
  try {
    sol = propagate(v, false);
  } catch (const Error&) {
    return out;
  }
  if (!endpoint_residual(sol, r)) return out;
  double rnorm = norm2(r);

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    if (rnorm <= tol_bvp) {
      out.converged = true;
      break;
    }
    Mat jac(n, n);
    bool jac_ok = true;
    for (int j = 0; j < n && jac_ok; ++j) {
      Vec vj = v;
      const double step = 1e-7 * (1.0 + std::fabs(v[static_cast<std::size_t>(j)]));
      vj[static_cast<std::size_t>(j)] += step;
      Vec rj(static_cast<std::size_t>(n));
      try {
        const auto solj = propagate(vj, false);
        jac_ok = endpoint_residual(solj, rj);
      } catch (const Error&) {
        jac_ok = false;
      }
      if (!jac_ok) break;
      for (int i = 0; i < n; ++i)
        jac(i, j) = (rj[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) / step;
    }
    if (!jac_ok) break;
    out.jacobian_condition = condition_estimate(jac);

    Vec delta_v;
    if (!lu_solve(jac, r, delta_v)) break;

    double lambda = 1.0;
    bool improved = false;
    while (lambda >= 1e-10) {
      Vec trial = v;
      for (int i = 0; i < n; ++i)
        trial[static_cast<std::size_t>(i)] -= lambda * delta_v[static_cast<std::size_t>(i)];
      try {
        GeodesicSolution tsol = propagate(trial, false);
        Vec tr(static_cast<std::size_t>(n));
        if (endpoint_residual(tsol, tr)) {
          const double tnorm = norm2(tr);
          if (tnorm < (1.0 - 1e-4 * lambda) * rnorm || tnorm <= tol_bvp) {
            v = trial;
            r = tr;
            rnorm = tnorm;
            sol = std::move(tsol);
            improved = true;
            break;
          }
        }
      } catch (const Error&) {
        // step left the field's domain; shorten it
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (rnorm <= tol_bvp) out.converged = true;

  out.endpoint_error = rnorm;
  if (out.converged) out.solution = propagate(v, true);
  else out.solution = std::move(sol);
  out.solution.residual =
      out.solution.x.size() > 8
          ? geodesic_residual(model, out.solution.as_path(), system)
          : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_GEODESIC_HPP
