#ifndef GEOCONNECT_GPW_HPP
#define GEOCONNECT_GPW_HPP

// Product models M x R^2 with metric <.,.> + 2 du dv + H(x,u) du^2 and the
// lightlike Killing field along v. Geodesics reduce exactly: u is affine,
// x solves D_s xdot = 1/2 (du)^2 grad_x H(x, u(s)), and v comes from the
// conserved momentum conjugate to u by quadrature. Outputs are re-verified
// against the full metric's geodesic equations, whose Christoffel symbols
// are assembled from exact field derivatives.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geoconnect/connect.hpp"
#include "geoconnect/geodesic.hpp"

namespace geoconnect {

struct GpwPoint {
  Vec x;
  double u = 0.0, v = 0.0;
};

class GpwModel {
public:
  GpwModel() = default;
  GpwModel(MetricModel base, const std::string& profile_src) : base_(std::move(base)) {
    profile_ = FieldExpr::parse(profile_src, base_.dimension());
    if (profile_.arity() != 1) throw Error("the profile H must be a scalar expression");
  }

  const MetricModel& base() const { return base_; }
  int dimension() const { return base_.dimension(); }

  double profile(std::span<const double> x, double u) const { return profile_.eval(x, u); }
  double profile_du(std::span<const double> x, double u) const {
    return profile_.derivative(x, base_.dimension(), u);
  }
  Vec profile_gradient_x(std::span<const double> x, double u) const {
    const int d = base_.dimension();
    Vec lowered(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) lowered[static_cast<std::size_t>(k)] = profile_.derivative(x, k, u);
    if (base_.identity_metric()) return lowered;
    Vec raised;
    if (!lu_solve(base_.metric(x), lowered, raised)) throw Error("singular base metric");
    return raised;
  }
  double profile_dx(std::span<const double> x, int k, double u) const {
    return profile_.derivative(x, k, u);
  }

  // H must not vanish identically
  void validate(std::span<const double> lo, std::span<const double> hi, int samples = 100,
                unsigned long seed = 99) const {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double largest = 0.0;
    for (int i = 0; i < samples; ++i) {
      Vec x(static_cast<std::size_t>(dimension()));
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = lo[k] + unit(g) * (hi[k] - lo[k]);
      largest = std::max(largest, std::fabs(profile(x, unit(g) * 4.0 - 2.0)));
    }
    if (largest == 0.0) throw Error("profile H vanishes identically on samples");
  }

  double inner(std::span<const double> x, double u, const Vec& xi, double a, double b,
               const Vec& xi2, double a2, double b2) const {
    return base_.inner(x, xi, xi2) + a * b2 + a2 * b + profile(x, u) * a * a2;
  }

private:
  MetricModel base_;
  FieldExpr profile_;
};

struct GpwPath {
  std::vector<double> s;
  std::vector<Vec> x;
  std::vector<Vec> xdot;
  std::vector<double> u, v;
  std::vector<double> vdot;
  double du = 0.0;  // the conserved pairing with the v-translation

  int segments() const { return static_cast<int>(x.size()) - 1; }
};

// The connecting curve used to certify geodesic existence: any spatial path
// lifted with affine u and v. Its pairing with the v-translation Killing
// field equals du identically.
inline GpwPath witness_curve(const GpwModel& model, const GpwPoint& p, const GpwPoint& q,
                             const DiscretePath& xpath) {
  (void)model;
  GpwPath out;
  const int m = xpath.segments();
  out.du = q.u - p.u;
  for (int i = 0; i <= m; ++i) {
    const double s = static_cast<double>(i) / m;
    out.s.push_back(s);
    out.x.push_back(xpath.nodes[static_cast<std::size_t>(i)]);
    out.u.push_back(p.u + out.du * s);
    out.v.push_back(p.v + (q.v - p.v) * s);
  }
  for (int i = 0; i < m; ++i) out.xdot.push_back(xpath.velocity(i));
  out.xdot.push_back(xpath.velocity(m - 1));
  out.vdot.assign(out.x.size(), q.v - p.v);
  return out;
}

// Sign classification of the pairing along a reduced path; u is affine by
// construction, so the pairing is the exact constant du.
inline SignClass gpw_classify(const GpwPath& path) {
  if (path.du >= kSignEps) return SignClass::constant_positive;
  if (path.du <= -kSignEps) return SignClass::constant_negative;
  if (std::fabs(path.du) <= kSignEps) return SignClass::identically_zero;
  return SignClass::sign_change;
}

// Full-metric residual: second differences of (x, u, v) samples against the
// geodesic equations of the assembled (d+2)-dimensional metric.
inline double gpw_residual(const GpwModel& model, const GpwPath& path) {
  const int d = model.dimension();
  const int n = d + 2;
  const int m = path.segments();
  if (m < 8) throw Error("gpw_residual needs at least 8 segments");
  const double h = 1.0 / m;
  double worst = 0.0;

  for (int i = 1; i < m; ++i) {
    // assemble metric derivative data at the center sample
    const Vec& xc = path.x[static_cast<std::size_t>(i)];
    const double uc = path.u[static_cast<std::size_t>(i)];
    Mat g(n, n);
    const Mat gm = model.base().metric(xc);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) g(a, b) = gm(a, b);
    g(d, d) = model.profile(xc, uc);
    g(d, d + 1) = g(d + 1, d) = 1.0;
    const Mat ginv = inverse(g);

    // dG[k] = derivative of the metric along coordinate k
    std::vector<Mat> dg(static_cast<std::size_t>(n), Mat(n, n));
    for (int k = 0; k < d; ++k) {
      const Mat dgm = model.base().metric_derivative(xc, k);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) dg[static_cast<std::size_t>(k)](a, b) = dgm(a, b);
      dg[static_cast<std::size_t>(k)](d, d) = model.profile_dx(xc, k, uc);
    }
    dg[static_cast<std::size_t>(d)](d, d) = model.profile_du(xc, uc);

    // velocities and accelerations by central differences
    Vec ydot(static_cast<std::size_t>(n)), ydd(static_cast<std::size_t>(n));
    auto fill = [&](int comp, double prev, double cur, double next) {
      ydot[static_cast<std::size_t>(comp)] = (next - prev) / (2 * h);
      ydd[static_cast<std::size_t>(comp)] = (next - 2 * cur + prev) / (h * h);
    };
    for (int a = 0; a < d; ++a)
      fill(a, path.x[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(a)],
           xc[static_cast<std::size_t>(a)],
           path.x[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(a)]);
    fill(d, path.u[static_cast<std::size_t>(i - 1)], uc, path.u[static_cast<std::size_t>(i + 1)]);
    fill(d + 1, path.v[static_cast<std::size_t>(i - 1)], path.v[static_cast<std::size_t>(i)],
         path.v[static_cast<std::size_t>(i + 1)]);

    for (int a = 0; a < n; ++a) {
      double acc = ydd[static_cast<std::size_t>(a)];
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double gamma = 0.0;
          for (int l = 0; l < n; ++l)
            gamma += ginv(a, l) * (dg[static_cast<std::size_t>(j)](l, k) +
                                   dg[static_cast<std::size_t>(k)](l, j) -
                                   dg[static_cast<std::size_t>(l)](j, k));
          acc += 0.5 * gamma * ydot[static_cast<std::size_t>(j)] * ydot[static_cast<std::size_t>(k)];
        }
      worst = std::max(worst, std::fabs(acc));
    }
  }
  return worst;
}

struct GpwVerdict {
  enum class Tag { geodesic, inconclusive };
  Tag tag = Tag::inconclusive;
  GpwPath path;
  double endpoint_error = std::numeric_limits<double>::infinity();
  double jacobian_condition = 0.0;
  double energy_drift = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::string note;
};

namespace detail {

struct GpwFlow {
  std::vector<std::vector<double>> states;  // [x, xdot, W, IW, IH]
  int steps = 0;
};

// Joint integration of the reduced x-equation with the quadratures needed
// for the v-reconstruction: W' = 1/2 du^2 dH/du, IW' = W, IH' = H.
inline GpwFlow gpw_flow(const GpwModel& model, const Vec& x0, const Vec& xdot0, double up,
                        double du, double h_ode) {
  const int d = model.dimension();
  const bool flat = model.base().identity_metric();
  auto deriv = [&](double s, const std::vector<double>& y, std::vector<double>& dy) {
    const std::span<const double> x(y.data(), static_cast<std::size_t>(d));
    const std::span<const double> xd(y.data() + d, static_cast<std::size_t>(d));
    const double u = up + du * s;
    const Vec grad = model.profile_gradient_x(x, u);
    for (int a = 0; a < d; ++a) {
      dy[static_cast<std::size_t>(a)] = xd[static_cast<std::size_t>(a)];
      dy[static_cast<std::size_t>(d + a)] = 0.5 * du * du * grad[static_cast<std::size_t>(a)];
    }
    if (!flat) {
      const Tensor3 gamma = model.base().christoffel(x);
      for (int a = 0; a < d; ++a) {
        double s2 = 0.0;
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            s2 += gamma[static_cast<std::size_t>(a)](j, k) * xd[static_cast<std::size_t>(j)] *
                  xd[static_cast<std::size_t>(k)];
        dy[static_cast<std::size_t>(d + a)] -= s2;
      }
    }
    dy[static_cast<std::size_t>(2 * d)] = 0.5 * du * du * model.profile_du(x, u);
    dy[static_cast<std::size_t>(2 * d + 1)] = y[static_cast<std::size_t>(2 * d)];
    dy[static_cast<std::size_t>(2 * d + 2)] = model.profile(x, u);
  };

  GpwFlow flow;
  const int steps = std::max(1, static_cast<int>(std::llround(1.0 / h_ode)));
  flow.steps = steps;
  std::vector<double> y(static_cast<std::size_t>(2 * d + 3), 0.0);
  for (int a = 0; a < d; ++a) {
    y[static_cast<std::size_t>(a)] = x0[static_cast<std::size_t>(a)];
    y[static_cast<std::size_t>(d + a)] = xdot0[static_cast<std::size_t>(a)];
  }
  flow.states.push_back(y);
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double s0 = static_cast<double>(k) / steps;
    // RK4 with the explicit s-dependence folded in
    const std::size_t nn = y.size();
    std::vector<double> k1(nn), k2(nn), k3(nn), k4(nn), tmp(nn);
    deriv(s0, y, k1);
    for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    deriv(s0 + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    deriv(s0 + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < nn; ++i) tmp[i] = y[i] + h * k3[i];
    deriv(s0 + h, tmp, k4);
    for (std::size_t i = 0; i < nn; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    flow.states.push_back(y);
  }
  return flow;
}

}  // namespace detail

// Direct geodesic connection in a product model: shooting on the reduced
// x-equation, affine u, and v recovered from the conserved momentum with
// the free constant fixed by the endpoint.
inline GpwVerdict gpw_connect(const GpwModel& model, const GpwPoint& p, const GpwPoint& q,
                              double tol_bvp = 1e-8, double h_ode = 1e-3, int max_iter = 100) {
  const int d = model.dimension();
  const double du = q.u - p.u;
  GpwVerdict out;

  Vec guess = vdiff(q.x, p.x);
  Vec r(static_cast<std::size_t>(d));
  auto endpoint = [&](const Vec& xdot0, Vec& res) {
    const auto flow = detail::gpw_flow(model, p.x, xdot0, p.u, du, h_ode);
    for (int a = 0; a < d; ++a)
      res[static_cast<std::size_t>(a)] =
          flow.states.back()[static_cast<std::size_t>(a)] - q.x[static_cast<std::size_t>(a)];
    return flow;
  };

  auto flow = endpoint(guess, r);
  double rnorm = norm2(r);
  for (int iter = 0; iter < max_iter && rnorm > tol_bvp; ++iter) {
    out.iterations = iter + 1;
    Mat jac(d, d);
    for (int j = 0; j < d; ++j) {
      Vec gj = guess;
      const double step = 1e-7 * (1.0 + std::fabs(guess[static_cast<std::size_t>(j)]));
      gj[static_cast<std::size_t>(j)] += step;
      Vec rj(static_cast<std::size_t>(d));
      endpoint(gj, rj);
      for (int i = 0; i < d; ++i)
        jac(i, j) = (rj[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) / step;
    }
    out.jacobian_condition = condition_estimate(jac);
    Vec step_v;
    if (!lu_solve(jac, r, step_v)) {
      out.note = "singular shooting Jacobian (resonant profile?)";
      return out;
    }
    double lambda = 1.0;
    bool improved = false;
    while (lambda >= 1e-12) {
      Vec trial = guess;
      for (int i = 0; i < d; ++i)
        trial[static_cast<std::size_t>(i)] -= lambda * step_v[static_cast<std::size_t>(i)];
      Vec rt(static_cast<std::size_t>(d));
      auto ft = endpoint(trial, rt);
      if (norm2(rt) < (1.0 - 1e-4 * lambda) * rnorm || norm2(rt) <= tol_bvp) {
        guess = trial;
        r = rt;
        rnorm = norm2(r);
        flow = std::move(ft);
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      out.note = "shooting stagnated";
      out.endpoint_error = rnorm;
      return out;
    }
  }
  out.endpoint_error = rnorm;
  if (rnorm > tol_bvp) {
    out.note = "no convergence within the iteration budget";
    return out;
  }

  // assemble the full curve: v from the conserved momentum w = vdot + H du,
  // with w0 chosen so that v(1) = vq
  const auto& states = flow.states;
  const int steps = flow.steps;
  const double iw1 = states.back()[static_cast<std::size_t>(2 * d + 1)];
  const double ih1 = states.back()[static_cast<std::size_t>(2 * d + 2)];
  const double w0 = (q.v - p.v) - iw1 + du * ih1;

  GpwPath path;
  path.du = du;
  for (int k = 0; k <= steps; ++k) {
    const auto& y = states[static_cast<std::size_t>(k)];
    const double s = static_cast<double>(k) / steps;
    path.s.push_back(s);
    path.x.emplace_back(y.begin(), y.begin() + d);
    path.xdot.emplace_back(y.begin() + d, y.begin() + 2 * d);
    path.u.push_back(p.u + du * s);
    const double W = y[static_cast<std::size_t>(2 * d)];
    const double IW = y[static_cast<std::size_t>(2 * d + 1)];
    const double IH = y[static_cast<std::size_t>(2 * d + 2)];
    path.v.push_back(p.v + w0 * s + IW - du * IH);
    path.vdot.push_back(w0 + W - du * model.profile(path.x.back(), path.u.back()));
  }

  // conservation of the full-metric energy along the samples
  double e0 = 0.0;
  for (std::size_t k = 0; k < path.x.size(); ++k) {
    const double e = model.inner(path.x[k], path.u[k], path.xdot[k], du, path.vdot[k],
                                 path.xdot[k], du, path.vdot[k]);
    if (k == 0) e0 = e;
    out.energy_drift = std::max(out.energy_drift, std::fabs(e - e0));
  }
  out.residual = gpw_residual(model, path);
  out.path = std::move(path);
  out.tag = GpwVerdict::Tag::geodesic;
  return out;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_GPW_HPP
