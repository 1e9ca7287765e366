#ifndef GEOCONNECT_OBSTRUCTION_HPP
#define GEOCONNECT_OBSTRUCTION_HPP

// Structural nonexistence certificates for product-form fields
// delta(x) = lambda(x1) e1 on flat metrics. For such fields the pairing
// <delta, xdot> is the derivative of the potential Lambda(x1) along the
// curve, so a constant-sign curve is exactly a Lambda-monotone curve. A
// breadth-first reachability search over a uniform grid decides, per
// monotonicity mode, whether any grid curve joins the endpoints; a
// certificate with all modes unreachable that survives 2x grid refinement
// is the machine-checkable obstruction object.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoconnect/path.hpp"
#include "geoconnect/spacetime.hpp"

namespace geoconnect {

// Numeric antiderivative of lambda along the first axis, anchored at 0.
class Potential {
public:
  Potential() = default;
  Potential(const MetricModel& model, double lo, double hi, int cells = 4096)
      : lo_(lo), hi_(hi) {
    const int d = model.dimension();
    probe_.assign(static_cast<std::size_t>(d), 0.0);
    model_ = &model;
    // seams of the first-axis field become exact cell boundaries
    std::vector<double> breaks{lo, hi, 0.0};
    for (const Seam& s : model.seams())
      if (s.axis == 0 && s.value > lo && s.value < hi) breaks.push_back(s.value);
    std::sort(breaks.begin(), breaks.end());
    nodes_.push_back(breaks.front());
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double a = breaks[b], c = breaks[b + 1];
      const int n = std::max(1, static_cast<int>(cells * (c - a) / (hi - lo)));
      for (int i = 1; i <= n; ++i) nodes_.push_back(a + (c - a) * i / n);
    }
    values_.assign(nodes_.size(), 0.0);
    const std::size_t anchor = static_cast<std::size_t>(
        std::lower_bound(nodes_.begin(), nodes_.end(), 0.0) - nodes_.begin());
    for (std::size_t i = anchor; i + 1 < nodes_.size(); ++i)
      values_[i + 1] = values_[i] + simpson(nodes_[i], nodes_[i + 1]);
    for (std::size_t i = anchor; i-- > 0;)
      values_[i] = values_[i + 1] - simpson(nodes_[i], nodes_[i + 1]);
  }

  double operator()(double x1) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x1);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    i = std::min(i, nodes_.size() - 2);
    return values_[i] + simpson(nodes_[i], x1);
  }

  double scale() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
  }

private:
  double lambda(double x1) const {
    Vec p = probe_;
    p[0] = x1;
    return model_->delta(p)[0];
  }

  double simpson(double a, double b) const {
    const int panels = 8;  // even
    const double h = (b - a) / panels;
    if (h == 0.0) return 0.0;
    double s = lambda(a) + lambda(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * lambda(a + i * h);
    return s * h / 3.0;
  }

  const MetricModel* model_ = nullptr;
  Vec probe_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

// Detect the product form and build the potential, or report that the
// field is out of the module's scope (rotational / non-product cases).
inline std::optional<Potential> potential_of(const MetricModel& model, double lo, double hi,
                                             unsigned long seed = 2024) {
  if (!model.identity_metric()) return std::nullopt;
  const int d = model.dimension();
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    Vec x(static_cast<std::size_t>(d));
    for (double& c : x) c = unit(g);
    x[0] = lo + (hi - lo) * (trial + 0.5) / 40.0;
    if (!model.in_domain(x)) continue;
    const Vec dv = model.delta(x);
    for (int k = 1; k < d; ++k)
      if (std::fabs(dv[static_cast<std::size_t>(k)]) > 1e-10) return std::nullopt;
    // first component must not depend on the other coordinates
    Vec y = x;
    for (int k = 1; k < d; ++k) y[static_cast<std::size_t>(k)] = unit(g);
    if (model.in_domain(y)) {
      const Vec dw = model.delta(y);
      if (std::fabs(dw[0] - dv[0]) > 1e-10 * (1.0 + std::fabs(dv[0]))) return std::nullopt;
    }
    // closedness spot check
    for (int k = 0; k < d; ++k) {
      Vec e(static_cast<std::size_t>(d), 0.0);
      e[static_cast<std::size_t>(k)] = 1.0;
      if (norm2(model.curl_operator(x, e)) > 1e-8) return std::nullopt;
    }
  }
  return Potential(model, lo, hi);
}

enum class MonotoneMode { nondecreasing, nonincreasing, level };

inline const char* mode_name(MonotoneMode m) {
  switch (m) {
    case MonotoneMode::nondecreasing: return "nondecreasing";
    case MonotoneMode::nonincreasing: return "nonincreasing";
    case MonotoneMode::level: return "level";
  }
  return "?";
}

struct ModeResult {
  MonotoneMode mode = MonotoneMode::nondecreasing;
  bool reachable = false;
  std::vector<Vec> witness;  // grid polyline when reachable
};

struct ObstructionCertificate {
  bool applicable = false;          // a potential exists for this model
  std::string potential_description;
  int resolution = 0;
  int refined_resolution = 0;
  bool refinement_stable = false;   // unreachability reproduced at 2x
  std::vector<ModeResult> modes;
  bool reduced_to_axis = false;     // search projected to the first axis

  bool all_unreachable() const {
    if (modes.empty()) return false;
    for (const auto& m : modes)
      if (m.reachable) return false;
    return true;
  }
  bool obstructed() const { return applicable && all_unreachable() && refinement_stable; }
};

namespace detail {

struct GridSpec {
  Vec lo;                    // grid origin (a node)
  Vec cell;                  // per-axis spacing
  std::vector<int> count;    // nodes per axis
  std::vector<std::size_t> stride;

  std::size_t total() const {
    std::size_t t = 1;
    for (int c : count) t *= static_cast<std::size_t>(c);
    return t;
  }
  Vec point(std::size_t idx) const {
    Vec x(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const std::size_t i = (idx / stride[k]) % static_cast<std::size_t>(count[k]);
      x[k] = lo[k] + cell[k] * static_cast<double>(i);
    }
    return x;
  }
};

inline GridSpec make_grid(const MetricModel& model, const Vec& xp, const Vec& xq,
                          int resolution) {
  const std::size_t d = xp.size();
  const double margin = 2.0 * norm2(vdiff(xq, xp)) + 1.0;
  Vec lo(d), hi(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = std::min(xp[k], xq[k]);
    hi[k] = std::max(xp[k], xq[k]);
  }
  for (const Box& b : model.excluded_regions())
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], b.lo[k]);
      hi[k] = std::max(hi[k], b.hi[k]);
    }
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] -= margin;
    hi[k] += margin;
  }
  GridSpec grid;
  grid.lo.resize(d);
  grid.cell.resize(d);
  grid.count.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    grid.cell[k] = (hi[k] - lo[k]) / resolution;
    // anchor the lattice so that xp is exactly a node
    const double offset = std::ceil((xp[k] - lo[k]) / grid.cell[k]);
    grid.lo[k] = xp[k] - offset * grid.cell[k];
    grid.count[k] = resolution + 2;
  }
  grid.stride.assign(d, 1);
  for (std::size_t k = 1; k < d; ++k)
    grid.stride[k] = grid.stride[k - 1] * static_cast<std::size_t>(grid.count[k - 1]);

  // a positive excluded extent thinner than a cell could hide between grid
  // lines; demand a finer grid in that case
  for (const Box& b : model.excluded_regions())
    for (std::size_t k = 0; k < d; ++k) {
      const double extent = b.hi[k] - b.lo[k];
      if (extent > 0.0 && extent < grid.cell[k])
        throw Error("grid too coarse to separate an excluded region; increase the resolution");
    }
  return grid;
}

inline std::size_t nearest_index(const GridSpec& grid, const Vec& x) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    long i = std::lround((x[k] - grid.lo[k]) / grid.cell[k]);
    i = std::max(0L, std::min(static_cast<long>(grid.count[k]) - 1, i));
    idx += grid.stride[k] * static_cast<std::size_t>(i);
  }
  return idx;
}

inline bool edge_allowed(MonotoneMode mode, double la, double lb, double eps) {
  switch (mode) {
    case MonotoneMode::nondecreasing: return lb >= la - eps;
    case MonotoneMode::nonincreasing: return lb <= la + eps;
    case MonotoneMode::level: return std::fabs(lb - la) <= eps;
  }
  return false;
}

inline ModeResult grid_bfs(const MetricModel& model, const Potential& pot, const GridSpec& grid,
                           const Vec& xp, const Vec& xq, MonotoneMode mode, double eps) {
  ModeResult out;
  out.mode = mode;
  const std::size_t d = grid.lo.size();
  const std::size_t total = grid.total();
  if (total > (1u << 26))
    throw Error("full-grid reachability exceeds the node cap; lower the resolution");

  // potential per first-axis column
  std::vector<double> column(static_cast<std::size_t>(grid.count[0]));
  for (int i = 0; i < grid.count[0]; ++i)
    column[static_cast<std::size_t>(i)] = pot(grid.lo[0] + grid.cell[0] * i);

  const std::size_t start = nearest_index(grid, xp);
  const std::size_t goal = nearest_index(grid, xq);

  std::vector<std::uint8_t> visited(total, 0);
  std::vector<std::int8_t> parent(total, -1);
  std::vector<std::size_t> frontier, next;
  if (!model.in_domain(grid.point(start))) return out;
  visited[start] = 1;
  frontier.push_back(start);

  auto axis_of = [&](std::size_t idx, std::size_t k) {
    return (idx / grid.stride[k]) % static_cast<std::size_t>(grid.count[k]);
  };

  bool found = start == goal;
  while (!frontier.empty() && !found) {
    next.clear();
    for (const std::size_t cur : frontier) {
      const Vec xcur = grid.point(cur);
      const double lcur = column[axis_of(cur, 0)];
      for (std::size_t k = 0; k < d && !found; ++k) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          const std::size_t i = axis_of(cur, k);
          if (sgn < 0 && i == 0) continue;
          if (sgn > 0 && i + 1 == static_cast<std::size_t>(grid.count[k])) continue;
          const std::size_t nb = sgn < 0 ? cur - grid.stride[k] : cur + grid.stride[k];
          if (visited[nb]) continue;
          const Vec xnb = grid.point(nb);
          if (!model.in_domain(xnb) || !model.segment_in_domain(xcur, xnb)) continue;
          const double lnb = column[axis_of(nb, 0)];
          if (!edge_allowed(mode, lcur, lnb, eps)) continue;
          visited[nb] = 1;
          parent[nb] = static_cast<std::int8_t>(2 * k + (sgn > 0 ? 1 : 0));
          if (nb == goal) {
            found = true;
            break;
          }
          next.push_back(nb);
        }
      }
      if (found) break;
    }
    frontier.swap(next);
  }

  out.reachable = found;
  if (found) {
    std::vector<Vec> rev;
    std::size_t cur = goal;
    rev.push_back(xq);
    while (cur != start) {
      const int dir = parent[cur];
      const std::size_t k = static_cast<std::size_t>(dir / 2);
      cur = (dir % 2) ? cur - grid.stride[k] : cur + grid.stride[k];
      rev.push_back(grid.point(cur));
    }
    rev.back() = xp;
    out.witness.assign(rev.rbegin(), rev.rend());
  }
  return out;
}

// With no excluded regions and a first-axis potential, the other
// coordinates are unconstrained, so reachability projects to that axis.
inline ModeResult axis_search(const Potential& pot, const GridSpec& grid, const Vec& xp,
                              const Vec& xq, MonotoneMode mode, double eps) {
  ModeResult out;
  out.mode = mode;
  const int n = grid.count[0];
  std::vector<double> column(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = pot(grid.lo[0] + grid.cell[0] * i);
  const long start = std::lround((xp[0] - grid.lo[0]) / grid.cell[0]);
  const long goal =
      std::max(0L, std::min(static_cast<long>(n) - 1,
                            std::lround((xq[0] - grid.lo[0]) / grid.cell[0])));

  std::vector<std::uint8_t> visited(static_cast<std::size_t>(n), 0);
  std::vector<long> frontier{start}, next;
  visited[static_cast<std::size_t>(start)] = 1;
  bool found = start == goal;
  while (!frontier.empty() && !found) {
    next.clear();
    for (long cur : frontier) {
      for (int sgn = -1; sgn <= 1 && !found; sgn += 2) {
        const long nb = cur + sgn;
        if (nb < 0 || nb >= n || visited[static_cast<std::size_t>(nb)]) continue;
        if (!edge_allowed(mode, column[static_cast<std::size_t>(cur)],
                          column[static_cast<std::size_t>(nb)], eps))
          continue;
        visited[static_cast<std::size_t>(nb)] = 1;
        if (nb == goal) found = true;
        next.push_back(nb);
      }
      if (found) break;
    }
    frontier.swap(next);
  }
  out.reachable = found;
  if (found) {
    // lift the axis walk to a straight-in-the-other-coordinates polyline
    out.witness.push_back(xp);
    if (goal != start) {
      const long steps = std::labs(goal - start);
      const long dir = goal > start ? 1 : -1;
      for (long i = 1; i <= steps; ++i) {
        Vec p(xp.size());
        p[0] = grid.lo[0] + grid.cell[0] * static_cast<double>(start + dir * i);
        const double f = static_cast<double>(i) / static_cast<double>(steps);
        for (std::size_t k = 1; k < xp.size(); ++k) p[k] = xp[k] + f * (xq[k] - xp[k]);
        out.witness.push_back(std::move(p));
      }
    }
    out.witness.back() = xq;
  }
  return out;
}

}  // namespace detail

// Reachability search in all three modes at the given grid resolution.
inline ObstructionCertificate monotone_path_search(const MetricModel& model, const Vec& xp,
                                                   const Vec& xq, int resolution,
                                                   bool force_full_grid = false) {
  ObstructionCertificate cert;
  cert.resolution = resolution;
  const detail::GridSpec grid = detail::make_grid(model, xp, xq, resolution);
  const double x1_lo = grid.lo[0];
  const double x1_hi = grid.lo[0] + grid.cell[0] * (grid.count[0] - 1);
  const auto pot = potential_of(model, x1_lo, x1_hi);
  if (!pot) {
    cert.applicable = false;
    cert.potential_description = "none (field is not a flat-metric first-axis product form)";
    return cert;
  }
  cert.applicable = true;
  cert.potential_description =
      "Lambda(x1) = cumulative integral of delta_1 from 0, tabulated on [" +
      std::to_string(x1_lo) + ", " + std::to_string(x1_hi) + "]";
  const double eps = 1e-9 * (1.0 + pot->scale());
  cert.reduced_to_axis = model.excluded_regions().empty() && !force_full_grid;
  for (MonotoneMode mode :
       {MonotoneMode::nondecreasing, MonotoneMode::nonincreasing, MonotoneMode::level}) {
    cert.modes.push_back(cert.reduced_to_axis
                             ? detail::axis_search(*pot, grid, xp, xq, mode, eps)
                             : detail::grid_bfs(model, *pot, grid, xp, xq, mode, eps));
  }
  return cert;
}

// Full certification: search at the requested resolution and, when every
// mode is unreachable, re-run at double resolution to check stability.
inline ObstructionCertificate certify(const MetricModel& model, const Vec& xp, const Vec& xq,
                                      int resolution, bool force_full_grid = false) {
  ObstructionCertificate cert = monotone_path_search(model, xp, xq, resolution, force_full_grid);
  if (cert.applicable && cert.all_unreachable()) {
    const ObstructionCertificate fine =
        monotone_path_search(model, xp, xq, 2 * resolution, force_full_grid);
    cert.refined_resolution = 2 * resolution;
    cert.refinement_stable = fine.all_unreachable();
  }
  return cert;
}

struct SignReport {
  double min_value = 0.0;
  double max_value = 0.0;
  bool sign_change = false;
};

// Min/max of <delta(x), xdot> along the path, sub-sampled inside segments
// so that a sign flip inside a long segment is not missed.
inline SignReport sign_conservation_check(const MetricModel& model, const DiscretePath& path,
                                          int total_samples = 10000) {
  SignReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.max_value = -std::numeric_limits<double>::infinity();
  const int m = path.segments();
  const int per_segment = std::max(1, total_samples / m);
  for (int i = 0; i < m; ++i) {
    const Vec v = path.velocity(i);
    const Vec& a = path.nodes[static_cast<std::size_t>(i)];
    const Vec& b = path.nodes[static_cast<std::size_t>(i + 1)];
    for (int j = 0; j < per_segment; ++j) {
      const double f = (j + 0.5) / per_segment;
      Vec x(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) x[k] = a[k] + f * (b[k] - a[k]);
      if (!model.in_domain(x)) continue;
      const double w = dot(model.delta_lowered(x), v);
      rep.min_value = std::min(rep.min_value, w);
      rep.max_value = std::max(rep.max_value, w);
    }
  }
  const double eps = 1e-9 * (1.0 + std::max(std::fabs(rep.min_value), std::fabs(rep.max_value)));
  rep.sign_change = rep.min_value < -eps && rep.max_value > eps;
  return rep;
}

// Simplify a grid witness by line-of-sight shortcuts that preserve the mode
// constraint, then interpolate smoothly; the clamped tangents keep each
// coordinate's monotone runs monotone.
inline DiscretePath smooth_witness(const MetricModel& model, const std::vector<Vec>& points,
                                   MonotoneMode mode, const Potential& pot, int m = 256) {
  const double eps = 1e-9 * (1.0 + pot.scale());
  auto segment_ok = [&](const Vec& a, const Vec& b) {
    if (!model.segment_in_domain(a, b)) return false;
    const int samples = 64;
    double prev = pot(a[0]);
    for (int i = 1; i <= samples; ++i) {
      const double f = static_cast<double>(i) / samples;
      const double x1 = a[0] + f * (b[0] - a[0]);
      const double cur = pot(x1);
      if (!detail::edge_allowed(mode, prev, cur, eps)) return false;
      prev = cur;
    }
    return true;
  };
  std::vector<Vec> simplified{points.front()};
  std::size_t i = 0;
  while (i + 1 < points.size()) {
    std::size_t j = points.size() - 1;
    while (j > i + 1 && !segment_ok(points[i], points[j])) --j;
    simplified.push_back(points[j]);
    i = j;
  }
  return smooth_through_points(simplified, m);
}

}  // namespace geoconnect

#endif  // GEOCONNECT_OBSTRUCTION_HPP
