#pragma once

#include <vector>

#include "bvy/functions.hpp"

namespace bvy {

/// Monte Carlo approximants of l_r u(x) and L_r u(x) on a decreasing radius ladder.
/// l_vals is nondecreasing and L_vals nonincreasing along the ladder, l <= L.
struct LipLadder {
  std::vector<double> radii;
  std::vector<double> l_vals;
  std::vector<double> L_vals;
};

struct LipConfig {
  std::vector<double> radii{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::size_t n_per_radius = 512;
  int subrungs = 8;
  std::uint64_t seed = 7;
  /// Use analytic gradients when the function provides them.
  bool prefer_analytic = true;
};

/// For each rung r, the sup-slope S(s) = max |u(y) - u(x)| / s over sampled
/// y in B_s(x) is evaluated on `subrungs` log-spaced radii per rung (reaching
/// one rung-ratio below the last radius); l_r and L_r are the running min and
/// max of S over all s <= r. Half of the samples are drawn on the sphere of
/// radius s (just inside it), half uniformly in the ball; draws outside the
/// support of m are rejected.
LipLadder lip_ladder(const SpaceInstance& space, const TestFunction& u, const Point& x, const std::vector<double>& radii,
                     std::size_t n_per_radius, std::uint64_t seed, int subrungs = 8);

struct PointwiseLip {
  double lip = 0.0;
  double Lip = 0.0;
  bool analytic = false;
};

/// (lip u(x), Lip u(x)): the gradient norm where analytic metadata exists,
/// otherwise the final rung of lip_ladder.
PointwiseLip pointwise_lipschitz(const SpaceInstance& space, const TestFunction& u, const Point& x,
                                 const LipConfig& cfg = {});

struct GlobalLipConfig {
  std::size_t n_pairs = 100000;
  std::uint64_t seed = 11;
  double inflation = 1.10;
};

/// Global Lipschitz constant: analytic bound when available, otherwise the
/// largest sampled difference quotient inflated by `inflation`.
double global_lip(const SpaceInstance& space, const TestFunction& u, const GlobalLipConfig& cfg = {});

/// Tangent-space blow-up u_{0,x}: w -> <g, w> on normed spaces and
/// (z, t) -> <g_H, z> on the Heisenberg group.
class Blowup {
 public:
  Blowup(SpaceKind kind, Point gradient) : kind_(kind), gradient_(std::move(gradient)) {}
  double operator()(const Point& w) const {
    if (kind_ == SpaceKind::Heisenberg1) return gradient_[0] * w[0] + gradient_[1] * w[1];
    return gradient_.dot(w);
  }
  const Point& gradient() const { return gradient_; }

 private:
  SpaceKind kind_;
  Point gradient_;
};

/// Throws CapabilityError on spaces without a tangent structure or without
/// analytic metadata at x.
Blowup blowup(const SpaceInstance& space, const TestFunction& u, const Point& x);

/// max over n sampled y in B_δ(x) of |u_{δ,x}(y) - u_{0,x}(φ_δ(y))|, where
/// u_{δ,x}(y) = (u(y) - u(x)) / δ and φ_δ(y) = δ_{1/δ}(x^{-1} y).
double blowup_residual(const SpaceInstance& space, const TestFunction& u, const Point& x, double delta, std::size_t n,
                       std::uint64_t seed);

}  // namespace bvy
