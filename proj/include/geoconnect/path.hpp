#ifndef GEOCONNECT_PATH_HPP
#define GEOCONNECT_PATH_HPP

// Endpoint-pinned sampled curves on the uniform grid s_i = i/m. Velocities
// are piecewise constant per segment; field data is evaluated at segment
// midpoints throughout so that quadrature identities hold exactly.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "geoconnect/geometry.hpp"
#include "geoconnect/linalg.hpp"

namespace geoconnect {

struct DiscretePath {
  std::vector<Vec> nodes;        // m+1 points in S
  std::vector<double> t_nodes;   // empty, or m+1 time values

  int segments() const { return static_cast<int>(nodes.size()) - 1; }
  double h() const { return 1.0 / segments(); }
  bool has_time() const { return !t_nodes.empty(); }

  Vec velocity(int i) const {
    const double m = static_cast<double>(segments());
    Vec v = vdiff(nodes[static_cast<std::size_t>(i + 1)], nodes[static_cast<std::size_t>(i)]);
    for (double& c : v) c *= m;
    return v;
  }

  Vec midpoint(int i) const {
    Vec p = vsum(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(i + 1)]);
    for (double& c : p) c *= 0.5;
    return p;
  }

  double t_velocity(int i) const {
    return (t_nodes[static_cast<std::size_t>(i + 1)] - t_nodes[static_cast<std::size_t>(i)]) *
           segments();
  }
};

struct EndpointPair {
  Vec xp, xq;
  double tp = 0.0, tq = 0.0;
  double dt() const { return tq - tp; }
};

inline DiscretePath straight_path(const Vec& xp, const Vec& xq, int m) {
  DiscretePath p;
  p.nodes.reserve(static_cast<std::size_t>(m + 1));
  for (int i = 0; i <= m; ++i) {
    const double s = static_cast<double>(i) / m;
    Vec node(xp.size());
    for (std::size_t k = 0; k < xp.size(); ++k) node[k] = xp[k] + s * (xq[k] - xp[k]);
    p.nodes.push_back(std::move(node));
  }
  return p;
}

// Affine time interpolation, the initializer for any operation that needs
// starting time values.
inline std::vector<double> affine_time(double tp, double tq, int m) {
  std::vector<double> t(static_cast<std::size_t>(m + 1));
  for (int i = 0; i <= m; ++i) t[static_cast<std::size_t>(i)] = tp + (tq - tp) * i / m;
  return t;
}

// Nodes and straight segments must stay clear of the excluded regions; a
// node-only test would let discrete paths tunnel through thin obstacles.
inline bool path_in_domain(const MetricModel& model, const DiscretePath& path) {
  for (const Vec& x : path.nodes)
    if (!model.in_domain(x)) return false;
  for (int i = 0; i < path.segments(); ++i)
    if (!model.segment_in_domain(path.nodes[static_cast<std::size_t>(i)],
                                 path.nodes[static_cast<std::size_t>(i + 1)]))
      return false;
  return true;
}

inline double sup_node_distance(const DiscretePath& a, const DiscretePath& b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    best = std::max(best, norm2(vdiff(a.nodes[i], b.nodes[i])));
  return best;
}

// Discrete H1 distance: squared node differences plus squared velocity
// differences (both weighted by h), including the time component when both
// paths carry one.
inline double h1_distance(const DiscretePath& a, const DiscretePath& b) {
  const double h = a.h();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const Vec diff = vdiff(a.nodes[i], b.nodes[i]);
    acc += h * dot(diff, diff);
  }
  for (int i = 0; i < a.segments(); ++i) {
    const Vec dv = vdiff(a.velocity(i), b.velocity(i));
    acc += h * dot(dv, dv);
  }
  if (a.has_time() && b.has_time()) {
    for (std::size_t i = 0; i < a.t_nodes.size(); ++i) {
      const double diff = a.t_nodes[i] - b.t_nodes[i];
      acc += h * diff * diff;
    }
    for (int i = 0; i < a.segments(); ++i) {
      const double dv = a.t_velocity(i) - b.t_velocity(i);
      acc += h * dv * dv;
    }
  }
  return std::sqrt(acc);
}

// L2 norm of the spatial velocity in the model metric.
inline double velocity_l2(const MetricModel& model, const DiscretePath& path) {
  const double h = path.h();
  double acc = 0.0;
  for (int i = 0; i < path.segments(); ++i) {
    const Vec v = path.velocity(i);
    acc += h * model.inner(path.midpoint(i), v, v);
  }
  return std::sqrt(acc);
}

inline double t_velocity_l2(const DiscretePath& path) {
  const double h = path.h();
  double acc = 0.0;
  for (int i = 0; i < path.segments(); ++i) acc += h * path.t_velocity(i) * path.t_velocity(i);
  return std::sqrt(acc);
}

// Resample a polyline at m+1 arclength-uniform parameters.
inline DiscretePath resample_polyline(const std::vector<Vec>& points, int m) {
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < points.size(); ++i)
    cum.push_back(cum.back() + norm2(vdiff(points[i], points[i - 1])));
  const double total = cum.back();
  DiscretePath out;
  out.nodes.reserve(static_cast<std::size_t>(m + 1));
  std::size_t seg = 0;
  for (int i = 0; i <= m; ++i) {
    const double target = total * i / m;
    while (seg + 2 < points.size() && cum[seg + 1] < target) ++seg;
    const double lo = cum[seg], hi = cum[seg + 1];
    const double f = hi > lo ? (target - lo) / (hi - lo) : 0.0;
    Vec node(points[seg].size());
    for (std::size_t k = 0; k < node.size(); ++k)
      node[k] = points[seg][k] + f * (points[seg + 1][k] - points[seg][k]);
    out.nodes.push_back(std::move(node));
  }
  out.nodes.front() = points.front();
  out.nodes.back() = points.back();
  return out;
}

// Catmull-Rom interpolation through control points with per-coordinate
// monotone tangent clamping (Fritsch-Carlson style): where a coordinate
// sequence is locally monotone the interpolant stays monotone, so the
// smoothing cannot flip the sign of a potential along the curve.
inline DiscretePath smooth_through_points(const std::vector<Vec>& points, int m) {
  const std::size_t n = points.size();
  if (n < 3) return resample_polyline(points, std::max(m, 1));
  const std::size_t dim = points[0].size();

  std::vector<Vec> tangents(n, Vec(dim, 0.0));
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prev = i > 0 ? points[i][k] - points[i - 1][k] : 0.0;
      const double next = i + 1 < n ? points[i + 1][k] - points[i][k] : 0.0;
      double t;
      if (i == 0) t = next;
      else if (i + 1 == n) t = prev;
      else t = 0.5 * (prev + next);
      // clamp: zero the tangent at local extrema / flats, and bound its
      // magnitude by three times the adjacent chord differences
      if (i > 0 && i + 1 < n) {
        if (prev * next <= 0.0) t = 0.0;
        else {
          const double bound = 3.0 * std::min(std::fabs(prev), std::fabs(next));
          if (std::fabs(t) > bound) t = t > 0 ? bound : -bound;
        }
      }
      tangents[i][k] = t;
    }
  }

  DiscretePath out;
  out.nodes.reserve(static_cast<std::size_t>(m + 1));
  const std::size_t nseg = n - 1;
  for (int i = 0; i <= m; ++i) {
    const double s = static_cast<double>(i) / m * nseg;
    std::size_t seg = std::min(static_cast<std::size_t>(s), nseg - 1);
    const double t = s - static_cast<double>(seg);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    Vec node(dim);
    for (std::size_t k = 0; k < dim; ++k)
      node[k] = h00 * points[seg][k] + h10 * tangents[seg][k] + h01 * points[seg + 1][k] +
                h11 * tangents[seg + 1][k];
    out.nodes.push_back(std::move(node));
  }
  out.nodes.front() = points.front();
  out.nodes.back() = points.back();
  return out;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_PATH_HPP
