#ifndef GEOCONNECT_SPACETIME_HPP
#define GEOCONNECT_SPACETIME_HPP

// Lorentzian product metric on S x R built from a MetricModel:
//   <(xi,tau),(xi',tau')> = <xi,xi'> + <delta,xi> tau' + <delta,xi'> tau
//                           - beta_eff tau tau'
// with beta_eff = beta + 1/n for the stationary perturbation family and
// the Killing field fixed as the t-translation.

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "geoconnect/geometry.hpp"

namespace geoconnect {

inline constexpr double kNullTolerance = 1e-10;  // |norm| below this counts as lightlike

enum class CausalCharacter { timelike, lightlike, spacelike, zero };

// Tangent vector at a spacetime point: spatial part xi and t-part tau.
struct SpacetimeVector {
  Vec xi;
  double tau = 0.0;
};

class SpacetimeModel {
public:
  SpacetimeModel() = default;
  explicit SpacetimeModel(MetricModel base, std::optional<long> perturbation = std::nullopt)
      : base_(std::move(base)), n_(perturbation) {
    if (n_ && *n_ <= 0) throw Error("perturbation index must be a positive integer");
  }

  const MetricModel& base() const { return base_; }
  int dimension() const { return base_.dimension(); }
  std::optional<long> perturbation() const { return n_; }

  SpacetimeModel with_perturbation(std::optional<long> n) const {
    SpacetimeModel m = *this;
    m.n_ = n;
    return m;
  }

  double beta_eff(std::span<const double> x) const {
    return base_.beta(x) + (n_ ? 1.0 / static_cast<double>(*n_) : 0.0);
  }

  double lorentz_inner(std::span<const double> x, const SpacetimeVector& z,
                       const SpacetimeVector& w) const {
    base_.require_in_domain(x);
    const Vec db = base_.delta_lowered(x);
    return base_.inner(x, z.xi, w.xi) + dot(db, z.xi) * w.tau + dot(db, w.xi) * z.tau -
           beta_eff(x) * z.tau * w.tau;
  }

  CausalCharacter causal_character(std::span<const double> x, const SpacetimeVector& z) const {
    if (norm2(z.xi) == 0.0 && z.tau == 0.0) return CausalCharacter::zero;
    const double q = lorentz_inner(x, z, z);
    if (std::fabs(q) <= kNullTolerance) return CausalCharacter::lightlike;
    return q < 0.0 ? CausalCharacter::timelike : CausalCharacter::spacelike;
  }

  // <zeta, K> with K the unit t-translation.
  double killing_pairing(std::span<const double> x, const SpacetimeVector& z) const {
    base_.require_in_domain(x);
    return dot(base_.delta_lowered(x), z.xi) - beta_eff(x) * z.tau;
  }

  // Riemannian metric canonically associated to K:
  //   <z,w>_R = <z,w>_L - 2 <z,K><w,K> / <K,K>;
  // requires K timelike at x, i.e. beta_eff > 0.
  double associated_riemannian_inner(std::span<const double> x, const SpacetimeVector& z,
                                     const SpacetimeVector& w) const {
    const double b = beta_eff(x);
    if (b <= kBetaFloor)
      throw Error("associated Riemannian metric degenerates: beta_eff <= 1e-12");
    return lorentz_inner(x, z, w) -
           2.0 * killing_pairing(x, z) * killing_pairing(x, w) / (-b);
  }

  // Assembled (d+1) x (d+1) metric matrix in coordinates (x..., t).
  Mat assembled_matrix(std::span<const double> x) const {
    const int d = dimension();
    Mat g(d + 1, d + 1);
    const Mat gs = base_.metric(x);
    const Vec db = base_.delta_lowered(x);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) g(i, j) = gs(i, j);
      g(i, d) = g(d, i) = db[static_cast<std::size_t>(i)];
    }
    g(d, d) = -beta_eff(x);
    return g;
  }

private:
  MetricModel base_;
  std::optional<long> n_;
};

}  // namespace geoconnect

#endif  // GEOCONNECT_SPACETIME_HPP
