#ifndef GEOCONNECT_CONNECT_HPP
#define GEOCONNECT_CONNECT_HPP

// Main pipeline: minimize the reduced functional of the perturbed metrics
// over discrete paths, reconstruct the time component, sweep the
// perturbation index with warm starts, detect convergence to a candidate
// of the lightlike system, and classify the outcome. Nonexistence is only
// ever claimed with an obstruction certificate; divergence alone yields an
// inconclusive verdict.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geoconnect/geodesic.hpp"
#include "geoconnect/log.hpp"
#include "geoconnect/minimize.hpp"
#include "geoconnect/obstruction.hpp"

namespace geoconnect {

enum class SignClass { constant_positive, constant_negative, identically_zero, sign_change };

inline const char* sign_class_name(SignClass s) {
  switch (s) {
    case SignClass::constant_positive: return "constant-positive";
    case SignClass::constant_negative: return "constant-negative";
    case SignClass::identically_zero: return "identically-zero";
    case SignClass::sign_change: return "sign-change";
  }
  return "?";
}

inline constexpr double kSignEps = 1e-9;

// Classification of s -> <zdot, K> sampled per segment.
inline SignClass classify_killing_sign(const SpacetimeModel& model, const DiscretePath& path) {
  if (!path.has_time()) throw Error("classify_killing_sign needs time values");
  if (path.segments() < 16) throw Error("classify_killing_sign needs at least 16 segments");
  bool all_pos = true, all_neg = true, all_zero = true;
  for (int i = 0; i < path.segments(); ++i) {
    const double w =
        model.killing_pairing(path.midpoint(i), {path.velocity(i), path.t_velocity(i)});
    all_pos = all_pos && w >= kSignEps;
    all_neg = all_neg && w <= -kSignEps;
    all_zero = all_zero && std::fabs(w) <= kSignEps;
  }
  if (all_pos) return SignClass::constant_positive;
  if (all_neg) return SignClass::constant_negative;
  if (all_zero) return SignClass::identically_zero;
  return SignClass::sign_change;
}

struct ConnectConfig {
  int nodes = 64;             // discrete path segments
  long n_start = 8;           // first perturbation index
  int k_max = 10;             // schedule n_k = n_start * 2^k, k <= k_max
  double tol_grad = 1e-8;
  int max_iter = 5000;
  double tol_lim = 1e-6;      // H1 gap for scheme convergence
  double tol_residual = 1e-6; // lightlike residual gate for candidates
  double tol_bvp = 1e-8;
  double h_ode = 1e-3;
  int grid = 1024;            // obstruction search resolution
  unsigned long seed = 0;
  int multistart = 4;
  bool full_schedule = false; // never exit the n-sweep early (diagnostics)
  double divergence_factor = 1e3;
  double stationary_beta_floor = 1e-3;
};

struct SweepRow {
  long n = 0;
  double jn = 0.0;
  double xdot_l2 = 0.0;
  double tdot_l2 = 0.0;
  double h1_gap = 0.0;       // distance to the previous iterate (inf at k=0)
  double residual = 0.0;     // lightlike residual of the candidate
  double w_min = 0.0, w_max = 0.0;
  int iterations = 0;
};

struct ConnectDiagnostics {
  std::vector<SweepRow> rows;
  std::vector<double> j_trace;  // optimizer trace of the last minimization
  std::string note;
  bool endpoints_swapped = false;
};

struct ConnectVerdict {
  enum class Tag { geodesic, obstructed, inconclusive };
  Tag tag = Tag::inconclusive;
  GeodesicSolution solution;           // valid for geodesic verdicts
  ObstructionCertificate certificate;  // valid for obstructed verdicts
  DiscretePath candidate;              // last scheme iterate, time included
  SignClass sign_class = SignClass::sign_change;
  ConnectDiagnostics diag;
};

namespace detail {

inline std::vector<double> flatten_interior(const DiscretePath& p) {
  std::vector<double> v;
  const int m = p.segments();
  const std::size_t d = p.nodes[0].size();
  v.reserve(static_cast<std::size_t>(m - 1) * d);
  for (int i = 1; i < m; ++i)
    for (std::size_t k = 0; k < d; ++k) v.push_back(p.nodes[static_cast<std::size_t>(i)][k]);
  return v;
}

inline DiscretePath unflatten_interior(const DiscretePath& shape, const std::vector<double>& v) {
  DiscretePath p = shape;
  const int m = p.segments();
  const std::size_t d = p.nodes[0].size();
  for (int i = 1; i < m; ++i)
    for (std::size_t k = 0; k < d; ++k)
      p.nodes[static_cast<std::size_t>(i)][k] = v[static_cast<std::size_t>(i - 1) * d + k];
  return p;
}

// Initial spatial path: the straight segment, or an axis-aligned detour
// around the first blocking region; `variant` randomizes the side and the
// padding for multistarts.
inline DiscretePath initial_path(const MetricModel& model, const Vec& xp, const Vec& xq, int m,
                                 std::mt19937_64& rng, int variant) {
  DiscretePath straight = straight_path(xp, xq, m);
  if (path_in_domain(model, straight)) return straight;

  const std::size_t d = xp.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pad_scale = 0.25 + 0.5 * unit(rng) + 0.5 * variant;
  for (const Box& box : model.excluded_regions()) {
    for (std::size_t k = 0; k < d; ++k) {
      for (int side = 0; side < 2; ++side) {
        const double extent = box.hi[k] - box.lo[k] + 1.0;
        const double out = side == 0 ? box.lo[k] - pad_scale * extent
                                     : box.hi[k] + pad_scale * extent;
        Vec w1 = xp, w2 = xq;
        w1[k] = out;
        w2[k] = out;
        const DiscretePath candidate = resample_polyline({xp, w1, w2, xq}, m);
        if (path_in_domain(model, candidate)) return candidate;
      }
    }
  }
  throw Error("no feasible initial path around the excluded regions");
}

}  // namespace detail

struct MinimizeJnResult {
  DiscretePath path;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> trace;
};

// Quasi-Newton descent of the reduced functional over the interior nodes.
inline MinimizeJnResult minimize_reduced_action(const SpacetimeModel& model,
                                                const EndpointPair& endpoints,
                                                const DiscretePath& init,
                                                const ConnectConfig& config) {
  if (init.segments() < 16) throw Error("minimize_reduced_action needs at least 16 segments");
  const MetricModel& base = model.base();
  const double dt = endpoints.dt();
  const bool use_n_form = model.perturbation() && base.beta_is_zero();

  auto to_path = [&](const std::vector<double>& v) {
    return detail::unflatten_interior(init, v);
  };
  auto objective = [&](const std::vector<double>& v) {
    const DiscretePath p = to_path(v);
    return use_n_form ? reduced_action_n(model, p, dt) : reduced_action(model, p, dt);
  };
  auto gradient = [&](const std::vector<double>& v) {
    const auto g = action_gradient(model, to_path(v), dt);
    std::vector<double> flat;
    flat.reserve(g.size() * g[0].size());
    for (const Vec& node : g)
      for (double c : node) flat.push_back(c);
    return flat;
  };
  auto feasible = [&](const std::vector<double>& v) {
    return path_in_domain(base, to_path(v));
  };

  MinimizeOptions opts;
  opts.tol_grad = config.tol_grad;
  opts.max_iter = config.max_iter;
  const auto res =
      lbfgs_minimize(objective, gradient, feasible, detail::flatten_interior(init), opts);

  MinimizeJnResult out;
  out.path = to_path(res.x);
  out.value = res.f;
  out.grad_norm = res.grad_norm;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.stop_reason = res.stop_reason;
  out.trace = res.f_trace;
  return out;
}

// Limit scheme over the perturbation schedule n_k = n_start * 2^k with warm
// starts. Convergence requires both a small H1 gap between successive
// iterates and a small residual of the lightlike system on the candidate;
// the candidate is then re-verified by shooting from its initial velocity.
inline ConnectVerdict limit_scheme(const SpacetimeModel& model, const EndpointPair& endpoints,
                                   const ConnectConfig& config) {
  const MetricModel& base = model.base();
  ConnectVerdict verdict;
  std::mt19937_64 rng(config.seed);

  DiscretePath incumbent =
      detail::initial_path(base, endpoints.xp, endpoints.xq, config.nodes, rng, 0);

  std::optional<DiscretePath> previous;
  double first_xdot_l2 = -1.0;
  bool diverged = false;
  bool candidate_ready = false;

  for (int k = 0; k <= config.k_max; ++k) {
    const long n = config.n_start << k;
    const SpacetimeModel pert = model.with_perturbation(n);

    MinimizeJnResult best = minimize_reduced_action(pert, endpoints, incumbent, config);
    if (k == 0 && !best.converged && config.multistart > 1) {
      for (int variant = 1; variant < config.multistart; ++variant) {
        try {
          const DiscretePath alt =
              detail::initial_path(base, endpoints.xp, endpoints.xq, config.nodes, rng, variant);
          MinimizeJnResult trial = minimize_reduced_action(pert, endpoints, alt, config);
          if ((trial.converged && !best.converged) ||
              (trial.converged == best.converged && trial.value < best.value))
            best = std::move(trial);
        } catch (const Error&) {
          // no feasible detour for this variant
        }
      }
    }

    DiscretePath candidate = reconstruct_time(pert, best.path, endpoints.dt(), endpoints.tp);

    SweepRow row;
    row.n = n;
    row.jn = best.value;
    row.iterations = best.iterations;
    row.xdot_l2 = velocity_l2(base, candidate);
    row.tdot_l2 = t_velocity_l2(candidate);
    row.h1_gap = previous ? h1_distance(candidate, *previous)
                          : std::numeric_limits<double>::infinity();
    try {
      row.residual = geodesic_residual(model, candidate, GeodesicSystem::lightlike);
    } catch (const Error&) {
      // candidate touches a point where the system degenerates (delta ~ 0)
      row.residual = std::numeric_limits<double>::infinity();
    }
    const SignReport sr = sign_conservation_check(base, candidate);
    row.w_min = sr.min_value;
    row.w_max = sr.max_value;
    verdict.diag.rows.push_back(row);
    verdict.diag.j_trace = best.trace;
    verdict.candidate = candidate;
    log_line(2, "n=" + std::to_string(n) + " Jn=" + std::to_string(row.jn) +
                    " gap=" + std::to_string(row.h1_gap) +
                    " residual=" + std::to_string(row.residual) +
                    " iters=" + std::to_string(row.iterations));

    if (first_xdot_l2 < 0.0) first_xdot_l2 = row.xdot_l2;
    if (row.xdot_l2 > config.divergence_factor * std::max(1.0, first_xdot_l2)) {
      diverged = true;
      if (!config.full_schedule) break;
    }

    if (row.h1_gap <= config.tol_lim && row.residual <= config.tol_residual) {
      candidate_ready = true;
      if (!config.full_schedule) break;
    }

    previous = std::move(candidate);
    incumbent = best.path;
  }

  if (candidate_ready) {
    const DiscretePath& cand = verdict.candidate;
    const auto shot = shoot(model, endpoints, GeodesicSystem::lightlike, cand.velocity(0),
                            cand.t_velocity(0), config.tol_bvp, 100, config.h_ode);
    if (shot.converged && !shot.solution.conservation_flag) {
      verdict.tag = ConnectVerdict::Tag::geodesic;
      verdict.solution = shot.solution;
      verdict.sign_class = classify_killing_sign(model, shot.solution.as_path());
      verdict.diag.note = "limit scheme converged; candidate re-verified by shooting";
      return verdict;
    }
    verdict.diag.note = "limit candidate failed shooting re-verification";
  } else {
    verdict.diag.note = diverged ? "minimizing sequence diverged" : "no convergence by k_max";
  }

  // consult the obstruction module before giving up
  const ObstructionCertificate cert = certify(base, endpoints.xp, endpoints.xq, config.grid);
  verdict.certificate = cert;
  if (cert.obstructed()) {
    verdict.tag = ConnectVerdict::Tag::obstructed;
    verdict.diag.note += "; obstruction certificate at resolution " +
                         std::to_string(cert.resolution) + " stable at " +
                         std::to_string(cert.refined_resolution);
  } else {
    verdict.tag = ConnectVerdict::Tag::inconclusive;
    verdict.diag.note += cert.applicable
                             ? "; obstruction search found a reachable mode, no certificate"
                             : "; obstruction search not applicable to this field";
  }
  return verdict;
}

// Entry point: normalizes the endpoint order, dispatches to the stationary
// fast path (when beta is bounded away from zero) or the limit scheme, and
// reparametrizes the output back when the endpoints were swapped.
inline ConnectVerdict connect(const SpacetimeModel& model, EndpointPair endpoints,
                              ConnectConfig config = {}) {
  const MetricModel& base = model.base();
  bool swapped = false;
  if (endpoints.dt() < 0.0) {
    std::swap(endpoints.xp, endpoints.xq);
    std::swap(endpoints.tp, endpoints.tq);
    swapped = true;
  }

  base.require_in_domain(endpoints.xp);
  base.require_in_domain(endpoints.xq);

  // inf beta over sampled points decides the dispatch
  double beta_min = std::numeric_limits<double>::infinity();
  {
    std::mt19937_64 rng(config.seed + 1);
    const DiscretePath probe = straight_path(endpoints.xp, endpoints.xq, 32);
    for (const Vec& x : probe.nodes)
      if (base.in_domain(x)) beta_min = std::min(beta_min, model.beta_eff(x));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      Vec x = endpoints.xp;
      for (std::size_t k = 0; k < x.size(); ++k)
        x[k] += unit(rng) * (1.0 + std::fabs(endpoints.xq[k] - endpoints.xp[k]));
      if (base.in_domain(x)) beta_min = std::min(beta_min, model.beta_eff(x));
    }
  }

  ConnectVerdict verdict;
  if (beta_min > config.stationary_beta_floor && !model.perturbation()) {
    // stationary fast path: one minimization, then shooting verification
    std::mt19937_64 rng(config.seed);
    const DiscretePath init =
        detail::initial_path(base, endpoints.xp, endpoints.xq, config.nodes, rng, 0);
    const MinimizeJnResult mr = minimize_reduced_action(model, endpoints, init, config);
    const DiscretePath cand = reconstruct_time(model, mr.path, endpoints.dt(), endpoints.tp);
    verdict.candidate = cand;
    verdict.diag.j_trace = mr.trace;
    SweepRow row;
    row.n = 0;
    row.jn = mr.value;
    row.iterations = mr.iterations;
    row.xdot_l2 = velocity_l2(base, cand);
    row.tdot_l2 = t_velocity_l2(cand);
    row.h1_gap = 0.0;
    row.residual = geodesic_residual(model, cand, GeodesicSystem::stationary);
    const SignReport sr = sign_conservation_check(base, cand);
    row.w_min = sr.min_value;
    row.w_max = sr.max_value;
    verdict.diag.rows.push_back(row);

    const auto shot = shoot(model, endpoints, GeodesicSystem::stationary, cand.velocity(0),
                            cand.t_velocity(0), config.tol_bvp, 100, config.h_ode);
    if (shot.converged && !shot.solution.conservation_flag) {
      verdict.tag = ConnectVerdict::Tag::geodesic;
      verdict.solution = shot.solution;
      verdict.sign_class = classify_killing_sign(model, shot.solution.as_path());
      verdict.diag.note = "stationary minimization verified by shooting";
    } else {
      verdict.tag = ConnectVerdict::Tag::inconclusive;
      verdict.diag.note = "stationary shooting did not converge";
    }
  } else {
    verdict = limit_scheme(model, endpoints, config);
  }

  if (swapped) {
    verdict.diag.endpoints_swapped = true;
    if (verdict.tag == ConnectVerdict::Tag::geodesic) {
      GeodesicSolution& s = verdict.solution;
      std::reverse(s.x.begin(), s.x.end());
      std::reverse(s.xdot.begin(), s.xdot.end());
      std::reverse(s.t.begin(), s.t.end());
      std::reverse(s.tdot.begin(), s.tdot.end());
      for (Vec& v : s.xdot)
        for (double& c : v) c = -c;
      for (double& v : s.tdot) v = -v;
      for (std::size_t i = 0; i < s.s.size(); ++i) s.s[i] = 1.0 - s.s[s.s.size() - 1 - i];
      std::sort(s.s.begin(), s.s.end());
      s.killing = -s.killing;
      if (verdict.sign_class == SignClass::constant_positive)
        verdict.sign_class = SignClass::constant_negative;
      else if (verdict.sign_class == SignClass::constant_negative)
        verdict.sign_class = SignClass::constant_positive;
    }
  }
  return verdict;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_CONNECT_HPP
