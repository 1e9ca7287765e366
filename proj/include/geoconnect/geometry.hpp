#ifndef GEOCONNECT_GEOMETRY_HPP
#define GEOCONNECT_GEOMETRY_HPP

// Riemannian base manifold data: metric matrix, the vector field delta,
// the non-negative function beta, and excluded coordinate regions. All
// builtin models are single-chart.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geoconnect/fieldlang.hpp"
#include "geoconnect/linalg.hpp"

namespace geoconnect {

inline constexpr double kDomainMargin = 1e-9;   // inflation for excluded-region tests
inline constexpr double kBetaFloor = 1e-12;     // below this, beta counts as zero
inline constexpr double kMaxMetricCondition = 1e12;

// Axis-aligned excluded box; degenerate extents model slits and segments.
struct Box {
  Vec lo, hi;

  bool contains(std::span<const double> x, double margin = kDomainMargin) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] - margin || x[i] > hi[i] + margin) return false;
    return true;
  }

  // Does the straight segment a->b meet the (inflated) box? Standard slab
  // clipping of the parameter interval.
  bool intersects_segment(std::span<const double> a, std::span<const double> b,
                          double margin = kDomainMargin) const {
    double t0 = 0.0, t1 = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double lod = lo[i] - margin, hid = hi[i] + margin;
      const double d = b[i] - a[i];
      if (std::fabs(d) < 1e-300) {
        if (a[i] < lod || a[i] > hid) return false;
        continue;
      }
      double u0 = (lod - a[i]) / d, u1 = (hid - a[i]) / d;
      if (u0 > u1) std::swap(u0, u1);
      t0 = std::max(t0, u0);
      t1 = std::min(t1, u1);
      if (t0 > t1) return false;
    }
    return true;
  }
};

using Tensor3 = std::vector<Mat>;  // [i](j,k) -> Gamma^i_{jk}

class MetricModel {
public:
  MetricModel() = default;

  // Entries may be empty for the identity metric. `delta_src`/`beta_src`
  // are fieldlang sources; a scalar delta is accepted when d == 1.
  static MetricModel make(int dimension, const std::vector<std::string>& metric_entries,
                          const std::string& delta_src, const std::string& beta_src,
                          std::vector<Box> excluded = {}, bool lightlike = false) {
    MetricModel m;
    m.d_ = dimension;
    m.excluded_ = std::move(excluded);
    m.lightlike_ = lightlike;
    if (!metric_entries.empty()) {
      if (static_cast<int>(metric_entries.size()) != dimension * dimension)
        throw Error("metric needs " + std::to_string(dimension * dimension) + " entries");
      m.identity_ = true;
      for (int i = 0; i < dimension; ++i)
        for (int j = 0; j < dimension; ++j) {
          const auto& src = metric_entries[static_cast<std::size_t>(i * dimension + j)];
          m.metric_.push_back(FieldExpr::parse(src, dimension));
          const bool diag_one = (i == j && src == "1");
          const bool off_zero = (i != j && src == "0");
          if (!diag_one && !off_zero) m.identity_ = false;
        }
    } else {
      m.identity_ = true;
    }
    m.delta_ = FieldExpr::parse(delta_src, dimension);
    if (m.delta_.arity() != dimension && !(dimension == 1 && m.delta_.arity() == 1))
      throw Error("delta must be a " + std::to_string(dimension) + "-vector expression");
    m.beta_ = FieldExpr::parse(beta_src, dimension);
    if (m.beta_.arity() != 1) throw Error("beta must be a scalar expression");
    m.beta_zero_ = beta_src == "0";
    m.collect_seams();
    return m;
  }

  // True when beta is the literal zero field (pure lightlike base).
  bool beta_is_zero() const { return beta_zero_; }

  int dimension() const { return d_; }
  bool identity_metric() const { return identity_; }
  bool lightlike_flag() const { return lightlike_; }
  const std::vector<Box>& excluded_regions() const { return excluded_; }
  const std::vector<Seam>& seams() const { return seams_; }
  const FieldExpr& delta_expr() const { return delta_; }
  const FieldExpr& beta_expr() const { return beta_; }

  bool in_domain(std::span<const double> x) const {
    for (const Box& b : excluded_)
      if (b.contains(x)) return false;
    return true;
  }

  bool segment_in_domain(std::span<const double> a, std::span<const double> b) const {
    for (const Box& box : excluded_)
      if (box.intersects_segment(a, b)) return false;
    return true;
  }

  void require_in_domain(std::span<const double> x) const {
    if (!in_domain(x)) throw Error("point lies in an excluded region");
  }

  Mat metric(std::span<const double> x) const {
    Mat g(d_, d_);
    if (identity_) {
      for (int i = 0; i < d_; ++i) g(i, i) = 1.0;
      return g;
    }
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) g(i, j) = metric_[static_cast<std::size_t>(i * d_ + j)].eval(x);
    // enforce exact symmetry of the evaluated matrix
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j) {
        const double s = 0.5 * (g(i, j) + g(j, i));
        g(i, j) = g(j, i) = s;
      }
    return g;
  }

  double inner(std::span<const double> x, std::span<const double> xi,
               std::span<const double> xi2) const {
    require_in_domain(x);
    if (identity_) return dot(xi, xi2);
    const Mat g = metric(x);
    double s = 0.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) s += xi[static_cast<std::size_t>(i)] * g(i, j) * xi2[static_cast<std::size_t>(j)];
    return s;
  }

  Vec delta(std::span<const double> x) const { return delta_.eval_vector(x); }
  double beta(std::span<const double> x) const { return beta_.eval(x); }

  // Lowered field: (g delta)_i.
  Vec delta_lowered(std::span<const double> x) const {
    const Vec dv = delta(x);
    if (identity_) return dv;
    return matvec(metric(x), dv);
  }

  // Jacobian of the lowered field: out(i, j) = d_j (g delta)_i.
  Mat delta_lowered_jacobian(std::span<const double> x) const {
    Mat out(d_, d_);
    if (identity_) {
      for (int j = 0; j < d_; ++j) {
        const Vec dd = delta_.derivative_vector(x, j);
        for (int i = 0; i < d_; ++i) out(i, j) = dd[static_cast<std::size_t>(i)];
      }
      return out;
    }
    const Vec dv = delta(x);
    const Mat g = metric(x);
    for (int j = 0; j < d_; ++j) {
      const Vec dd = delta_.derivative_vector(x, j);
      const Mat dg = metric_derivative(x, j);
      for (int i = 0; i < d_; ++i) {
        double s = 0.0;
        for (int k = 0; k < d_; ++k)
          s += dg(i, k) * dv[static_cast<std::size_t>(k)] + g(i, k) * dd[static_cast<std::size_t>(k)];
        out(i, j) = s;
      }
    }
    return out;
  }

  // Euclidean gradient of beta, one entry per coordinate.
  Vec beta_gradient_lowered(std::span<const double> x) const {
    Vec gb(static_cast<std::size_t>(d_));
    for (int j = 0; j < d_; ++j) gb[static_cast<std::size_t>(j)] = beta_.derivative(x, j);
    return gb;
  }

  // Metric gradient of beta: g^{ij} d_j beta.
  Vec beta_gradient(std::span<const double> x) const {
    Vec gb = beta_gradient_lowered(x);
    if (identity_) return gb;
    Vec raised;
    if (!lu_solve(metric(x), gb, raised)) throw Error("singular metric in beta_gradient");
    return raised;
  }

  Mat metric_derivative(std::span<const double> x, int direction) const {
    Mat dg(d_, d_);
    if (identity_) return dg;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        dg(i, j) = metric_[static_cast<std::size_t>(i * d_ + j)].derivative(x, direction);
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j) {
        const double s = 0.5 * (dg(i, j) + dg(j, i));
        dg(i, j) = dg(j, i) = s;
      }
    return dg;
  }

  // Gamma^i_{jk} = 1/2 g^{il} (d_j g_{lk} + d_k g_{lj} - d_l g_{jk}).
  Tensor3 christoffel(std::span<const double> x) const {
    Tensor3 gamma(static_cast<std::size_t>(d_), Mat(d_, d_));
    if (identity_) return gamma;
    const Mat g = metric(x);
    if (condition_estimate(g) > kMaxMetricCondition)
      throw Error("metric matrix is numerically singular (condition number > 1e12)");
    const Mat ginv = inverse(g);
    std::vector<Mat> dg;
    dg.reserve(static_cast<std::size_t>(d_));
    for (int l = 0; l < d_; ++l) dg.push_back(metric_derivative(x, l));
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int k = j; k < d_; ++k) {
          double s = 0.0;
          for (int l = 0; l < d_; ++l)
            s += ginv(i, l) * (dg[static_cast<std::size_t>(j)](l, k) +
                               dg[static_cast<std::size_t>(k)](l, j) -
                               dg[static_cast<std::size_t>(l)](j, k));
          gamma[static_cast<std::size_t>(i)](j, k) = 0.5 * s;
          gamma[static_cast<std::size_t>(i)](k, j) = 0.5 * s;
        }
    return gamma;
  }

  // F(x)[xi]: the vector representing the antisymmetrized differential of
  // the lowered field,  <F[xi], xi'> = <delta'[xi], xi'> - <xi, delta'[xi']>.
  // In coordinates F^k = g^{ki} (d_j db_i - d_i db_j) xi^j with db = g delta;
  // the Christoffel contributions cancel in the antisymmetrization.
  Vec curl_operator(std::span<const double> x, std::span<const double> xi) const {
    const Mat jac = delta_lowered_jacobian(x);
    Vec lowered(static_cast<std::size_t>(d_), 0.0);
    for (int i = 0; i < d_; ++i) {
      double s = 0.0;
      for (int j = 0; j < d_; ++j) s += (jac(i, j) - jac(j, i)) * xi[static_cast<std::size_t>(j)];
      lowered[static_cast<std::size_t>(i)] = s;
    }
    if (identity_) return lowered;
    Vec raised;
    if (!lu_solve(metric(x), lowered, raised)) throw Error("singular metric in curl_operator");
    return raised;
  }

  // Construction-time sanity sampling: symmetric positive definite metric,
  // beta >= 0, and the lightlike flag's requirements.
  void validate(std::span<const double> box_lo, std::span<const double> box_hi,
                int samples = 200, unsigned long seed = 12345) const {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int done = 0;
    while (done < samples) {
      Vec x(static_cast<std::size_t>(d_));
      for (int i = 0; i < d_; ++i)
        x[static_cast<std::size_t>(i)] =
            box_lo[static_cast<std::size_t>(i)] +
            unit(g) * (box_hi[static_cast<std::size_t>(i)] - box_lo[static_cast<std::size_t>(i)]);
      if (!in_domain(x)) continue;
      ++done;
      const Vec ev = symmetric_eigenvalues(metric(x));
      for (double e : ev)
        if (e <= 1e-12) throw Error("metric is not positive definite at a sampled point");
      const double b = beta(x);
      if (b < 0.0) throw Error("beta is negative at a sampled point");
      if (lightlike_) {
        if (b != 0.0 && std::fabs(b) > kBetaFloor)
          throw Error("lightlike model requires beta == 0");
        if (norm2(delta(x)) <= kBetaFloor)
          throw Error("lightlike model requires a non-vanishing delta");
      }
    }
  }

  // --- builtin catalog ------------------------------------------------

  static MetricModel flat(int dimension, const std::string& delta_src,
                          const std::string& beta_src) {
    const bool lightlike = beta_src == "0";
    return make(dimension, {}, delta_src, beta_src, {}, lightlike);
  }

  // Flat plane minus the segment [-1,1] x {0}; constant delta = (1, 0).
  static MetricModel slit_plane() {
    return make(2, {}, "vec(1, 0)", "0", {Box{{-1.0, 0.0}, {1.0, 0.0}}}, true);
  }

  // Flat 3-space with delta = (d1(x1), 0, 0), d1 = -cos^3 left of pi, 1 after.
  static MetricModel cos3_wall() {
    return make(3, {}, "vec(piecewise(x1 < pi, -cos(x1)^3, 1), 0, 0)", "0", {}, true);
  }

  static MetricModel stationary_flat(int dimension = 2) {
    std::string zeros = "vec(";
    for (int i = 0; i < dimension; ++i) zeros += i ? ", 0" : "0";
    zeros += ")";
    return make(dimension, {}, dimension == 1 ? "0" : zeros, "1", {}, false);
  }

  static MetricModel builtin(const std::string& name) {
    if (name == "flat") return flat(2, "vec(1, 0)", "0");
    if (name == "slit-plane") return slit_plane();
    if (name == "cos3-wall") return cos3_wall();
    if (name == "stationary-flat") return stationary_flat(2);
    throw Error("unknown builtin model '" + name + "'");
  }

private:
  void collect_seams() {
    auto push = [&](const std::vector<Seam>& s) {
      for (const Seam& seam : s)
        if (seam.axis >= 0) seams_.push_back(seam);
    };
    push(delta_.seams());
    push(beta_.seams());
    for (const auto& e : metric_) push(e.seams());
  }

  int d_ = 0;
  std::vector<FieldExpr> metric_;  // empty when identity_
  bool identity_ = true;
  bool beta_zero_ = false;
  FieldExpr delta_;
  FieldExpr beta_;
  std::vector<Box> excluded_;
  std::vector<Seam> seams_;
  bool lightlike_ = false;
};

}  // namespace geoconnect

#endif  // GEOCONNECT_GEOMETRY_HPP
