#ifndef GEOCONNECT_ACTION_HPP
#define GEOCONNECT_ACTION_HPP

// Variational layer: the curve action, the Killing constant of a
// constrained curve, time reconstruction, the reduced functionals on the
// spatial component alone, the lightlike arrival time, and the analytic
// gradient of the reduced functional.
//
// All integrals use the midpoint rule per segment, matching the
// piecewise-constant discrete velocities; this keeps the reduction
// identities exact at the discrete level.

#include <cmath>
#include <vector>

#include "geoconnect/path.hpp"
#include "geoconnect/spacetime.hpp"

namespace geoconnect {

namespace detail {

struct SegmentTotals {
  std::vector<double> w;      // <delta, xdot> per segment
  std::vector<double> beta;   // beta_eff at midpoints
  std::vector<double> segE;   // <xdot, xdot> per segment
  double E = 0.0;             // h * sum segE
  double A = 0.0;             // sum (h/beta) w
  double B = 0.0;             // sum (h/beta)
  double W = 0.0;             // sum h w
};

inline SegmentTotals segment_totals(const SpacetimeModel& model, const DiscretePath& path,
                                    bool need_beta) {
  const MetricModel& base = model.base();
  const int m = path.segments();
  const double h = path.h();
  SegmentTotals t;
  t.w.resize(static_cast<std::size_t>(m));
  t.beta.resize(static_cast<std::size_t>(m));
  t.segE.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Vec mid = path.midpoint(i);
    base.require_in_domain(mid);
    const Vec v = path.velocity(i);
    const double se = base.inner(mid, v, v);
    const double w = dot(base.delta_lowered(mid), v);
    const double b = model.beta_eff(mid);
    t.segE[static_cast<std::size_t>(i)] = se;
    t.w[static_cast<std::size_t>(i)] = w;
    t.beta[static_cast<std::size_t>(i)] = b;
    t.E += h * se;
    t.W += h * w;
    if (need_beta) {
      if (b <= kBetaFloor)
        throw Error("beta_eff vanishes on a segment midpoint; reduction needs beta_eff > 0");
      t.A += h * w / b;
      t.B += h / b;
    }
  }
  return t;
}

}  // namespace detail

// Curve action 1/2 integral <zdot, zdot>_L.
inline double action_value(const SpacetimeModel& model, const DiscretePath& path) {
  if (!path.has_time()) throw Error("action_value needs a path with time values");
  const double h = path.h();
  const auto tot = detail::segment_totals(model, path, false);
  double acc = 0.0;
  for (int i = 0; i < path.segments(); ++i) {
    const double td = path.t_velocity(i);
    acc += h * (tot.segE[static_cast<std::size_t>(i)] +
                2.0 * tot.w[static_cast<std::size_t>(i)] * td -
                tot.beta[static_cast<std::size_t>(i)] * td * td);
  }
  return 0.5 * acc;
}

// The conserved value of <zdot, K> shared by every time reconstruction of
// the spatial path with the given endpoint time gap.
inline double killing_constant(const SpacetimeModel& model, const DiscretePath& xpath,
                               double dt) {
  const auto tot = detail::segment_totals(model, xpath, true);
  return (tot.A - dt) / tot.B;
}

// Rebuild the time component from the Killing constraint: per segment
// tdot = (<delta, xdot> - C) / beta_eff, integrated cumulatively. The
// result reaches tp + dt exactly up to rounding, and its Killing pairing
// equals C on every segment.
inline DiscretePath reconstruct_time(const SpacetimeModel& model, const DiscretePath& xpath,
                                     double dt, double tp) {
  const auto tot = detail::segment_totals(model, xpath, true);
  const double c = (tot.A - dt) / tot.B;
  const double h = xpath.h();
  DiscretePath out = xpath;
  out.t_nodes.assign(xpath.nodes.size(), tp);
  for (int i = 0; i < xpath.segments(); ++i) {
    const double tdot =
        (tot.w[static_cast<std::size_t>(i)] - c) / tot.beta[static_cast<std::size_t>(i)];
    out.t_nodes[static_cast<std::size_t>(i + 1)] = out.t_nodes[static_cast<std::size_t>(i)] + h * tdot;
  }
  return out;
}

// Reduced functional on the spatial path: the action of the reconstructed
// curve, expressed through x alone. Uses the numerically stable centered
// form of the middle bracket.
inline double reduced_action(const SpacetimeModel& model, const DiscretePath& xpath, double dt) {
  const auto tot = detail::segment_totals(model, xpath, true);
  const double h = xpath.h();
  const double wbar = tot.A / tot.B;
  double variance = 0.0;
  for (int i = 0; i < xpath.segments(); ++i) {
    const double dw = tot.w[static_cast<std::size_t>(i)] - wbar;
    variance += (h / tot.beta[static_cast<std::size_t>(i)]) * dw * dw;
  }
  return 0.5 * tot.E + 0.5 * variance - 0.5 * dt * (dt - 2.0 * tot.A) / tot.B;
}

// Reduced functional of the 1/n-perturbed metric over a lightlike base
// (beta == 0), in its explicit n-form; defers to reduced_action otherwise.
inline double reduced_action_n(const SpacetimeModel& model, const DiscretePath& xpath,
                               double dt) {
  if (!model.perturbation()) throw Error("reduced_action_n needs a perturbed model");
  if (!model.base().beta_is_zero()) return reduced_action(model, xpath, dt);
  const double n = static_cast<double>(*model.perturbation());
  const auto tot = detail::segment_totals(model, xpath, false);
  const double h = xpath.h();
  double variance = 0.0;
  for (int i = 0; i < xpath.segments(); ++i) {
    const double dw = tot.w[static_cast<std::size_t>(i)] - tot.W;
    variance += h * dw * dw;
  }
  return 0.5 * tot.E + 0.5 * n * variance - dt * (0.5 * dt / n - tot.W);
}

// Cauchy-Schwarz lower bound of the reduced functional; the slack term
// absorbs quadrature rounding.
inline bool lower_bound_holds(const SpacetimeModel& model, const DiscretePath& xpath, double dt) {
  const auto tot = detail::segment_totals(model, xpath, true);
  const double rhs = tot.E - dt * (dt - 2.0 * tot.A) / tot.B;
  return 2.0 * reduced_action(model, xpath, dt) >= rhs - 1e-9;
}

struct ArrivalTime {
  double T = 0.0;                    // arrival time of the lightlike lift
  std::vector<double> t_nodes;       // reconstructed lightlike time values
  double max_null_defect = 0.0;      // max |<zdot,zdot>_L| over segments
};

// Future lightlike lift of a spatial path: per segment the positive root of
// <zdot,zdot>_L = 0 in tdot, integrated cumulatively; T is its total gap.
inline ArrivalTime arrival_time(const SpacetimeModel& model, const DiscretePath& xpath,
                                double tp = 0.0) {
  const auto tot = detail::segment_totals(model, xpath, true);
  double speed = 0.0;
  for (double se : tot.segE) speed += se;
  if (speed == 0.0) throw Error("arrival_time needs a non-constant path");
  const double h = xpath.h();
  ArrivalTime out;
  out.t_nodes.assign(xpath.nodes.size(), tp);
  for (int i = 0; i < xpath.segments(); ++i) {
    const double w = tot.w[static_cast<std::size_t>(i)];
    const double b = tot.beta[static_cast<std::size_t>(i)];
    const double se = tot.segE[static_cast<std::size_t>(i)];
    const double tdot = (w + std::sqrt(w * w + se * b)) / b;
    out.t_nodes[static_cast<std::size_t>(i + 1)] =
        out.t_nodes[static_cast<std::size_t>(i)] + h * tdot;
    const double defect = se + 2.0 * w * tdot - b * tdot * tdot;
    out.max_null_defect = std::max(out.max_null_defect, std::fabs(defect));
  }
  out.T = out.t_nodes.back() - tp;
  return out;
}

// Exact gradient of the discretized reduced functional with respect to the
// interior nodes (endpoints are pinned). Entry k corresponds to node k+1.
inline std::vector<Vec> action_gradient(const SpacetimeModel& model, const DiscretePath& xpath,
                                        double dt) {
  const MetricModel& base = model.base();
  const int d = base.dimension();
  const int m = xpath.segments();
  const double h = xpath.h();
  const auto tot = detail::segment_totals(model, xpath, true);
  const double wbar = tot.A / tot.B;

  // adjoint coefficients for the per-segment quantities
  std::vector<double> cw(static_cast<std::size_t>(m)), cb(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double r = h / tot.beta[static_cast<std::size_t>(i)];
    const double dw = tot.w[static_cast<std::size_t>(i)] - wbar;
    cw[static_cast<std::size_t>(i)] = r * (dw + dt / tot.B);
    const double cr = 0.5 * dw * dw + (dt / tot.B) * tot.w[static_cast<std::size_t>(i)] -
                      (dt / (tot.B * tot.B)) * (tot.A - 0.5 * dt);
    cb[static_cast<std::size_t>(i)] =
        -cr * h / (tot.beta[static_cast<std::size_t>(i)] * tot.beta[static_cast<std::size_t>(i)]);
  }

  std::vector<Vec> grad(static_cast<std::size_t>(m - 1), Vec(static_cast<std::size_t>(d), 0.0));
  const bool identity = base.identity_metric();
  for (int i = 0; i < m; ++i) {
    const Vec mid = xpath.midpoint(i);
    const Vec u = vdiff(xpath.nodes[static_cast<std::size_t>(i + 1)],
                        xpath.nodes[static_cast<std::size_t>(i)]);
    const Vec db = base.delta_lowered(mid);
    const Mat jac = base.delta_lowered_jacobian(mid);
    const Vec gradb = base.beta_gradient_lowered(mid);
    Vec gu(static_cast<std::size_t>(d));
    if (identity) gu = u;
    else gu = matvec(base.metric(mid), u);

    for (int side = 0; side < 2; ++side) {
      const int node = i + side;
      if (node == 0 || node == m) continue;
      Vec& out = grad[static_cast<std::size_t>(node - 1)];
      const double sgn = side == 0 ? -1.0 : 1.0;
      for (int a = 0; a < d; ++a) {
        // dE_i/dx^a: through the velocity and through the midpoint metric
        double dE = sgn * 2.0 * gu[static_cast<std::size_t>(a)] / h;
        if (!identity) {
          const Mat dg = base.metric_derivative(mid, a);
          double quad = 0.0;
          for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q)
              quad += u[static_cast<std::size_t>(p)] * dg(p, q) * u[static_cast<std::size_t>(q)];
          dE += 0.5 * quad / h;
        }
        // dw_i/dx^a
        double ddbu = 0.0;
        for (int p = 0; p < d; ++p) ddbu += jac(p, a) * u[static_cast<std::size_t>(p)];
        const double dwda = (sgn * db[static_cast<std::size_t>(a)] + 0.5 * ddbu) / h;
        // dbeta_i/dx^a (midpoint dependence only)
        const double dbda = 0.5 * gradb[static_cast<std::size_t>(a)];
        out[static_cast<std::size_t>(a)] += 0.5 * dE + cw[static_cast<std::size_t>(i)] * dwda +
                                            cb[static_cast<std::size_t>(i)] * dbda;
      }
    }
  }
  return grad;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_ACTION_HPP
