#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "bvy/functions.hpp"

namespace bvy {

enum class EstimatorKind { Auto, Direct, Localized };

std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(std::string_view name);

struct BVYConfig {
  double p = 2.0;
  /// Exponent used in the superlevel set; equals the space's N unless the
  /// optimality of N is being probed.
  double N_bar = 2.0;
  std::vector<double> lambda_ladder;
  std::size_t n_outer = 100000;
  std::size_t n_inner = 32;
  std::size_t n_pairs = 1000000;
  /// ε of the localization radius, relative to the global Lipschitz bound.
  double epsilon_loc = 0.05;
  std::uint64_t seed = 1;
  EstimatorKind estimator = EstimatorKind::Auto;
  /// Window samples for ∫ Lip^p dm and the K-norm outer integral.
  std::size_t n_grad = 200000;
  /// Samples in B_{1+eps} for the tangent-sphere quadrature.
  std::size_t n_shell = 1 << 22;
  double shell_eps = 0.02;
};

/// Throws PreconditionError unless p >= 1, N_bar > 0, the ladder is strictly
/// increasing and positive, and all budgets are nonzero.
void validate(const BVYConfig& cfg);

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct CurveRow {
  double lambda = 0.0;
  MCEstimate m_hat;
  double rescaled = 0.0;
  double rescaled_std_error = 0.0;
  EstimatorKind estimator = EstimatorKind::Direct;
  std::size_t n_outer = 0;
  std::size_t n_inner = 0;
};

struct RescaledCurve {
  double p = 2.0;
  std::vector<CurveRow> rows;
};

struct LimitFit {
  /// Median of the rescaled values on the top ceil(k/3) rungs.
  double limit = 0.0;
  std::size_t plateau_rungs = 0;
  /// Least-squares slope of log(λ^p M) against log λ; NaN when undefined.
  double slope = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
  /// Some rescaled value is nonpositive, so the log-log slope is undefined.
  bool diverges_to_zero = false;
};

/// |u(x) - u(y)| >= λ d(x,y)^{N_bar/p + 1}, for x != y.
bool pair_in_E(const SpaceInstance& space, const TestFunction& u, double p, double N_bar, double lambda,
               const Point& x, const Point& y);

/// (m×m)(E_λ) from n_pairs i.i.d. window pairs; binomial standard error.
MCEstimate pair_measure_direct(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg, double lambda);

/// Radius R(λ) = ((1 + ε) 𝐋 / λ)^{p / N_bar} containing every section of E_λ.
double localization_radius(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg, double lambda);

/// Largest admissible localization radius: the support margin when the support
/// sits strictly inside the window, otherwise a quarter of the shortest window side.
double localization_limit(const SpaceInstance& space, const TestFunction& u);

/// Two-stage estimator ∫ m(Ê_λ(x)) dm(x): outer window draws x, inner draws
/// uniform on B_{R(λ)}(x) weighted by the exact ball volume and the density of m.
MCEstimate pair_measure_localized(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg,
                                  double lambda);

/// The estimator `rescaled_curve` would pick under cfg.estimator.
EstimatorKind choose_estimator(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg);

RescaledCurve rescaled_curve(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg);

/// Throws PreconditionError for fewer than three rungs.
LimitFit limit_fit(const RescaledCurve& curve);

/// True when M̂ is nonincreasing in λ within `k` joint standard errors.
bool monotone_within(const RescaledCurve& curve, double k = 3.0);

/// ∫_{S^{N-1}} |e·w|^p dw in closed form.
double k_const(double p, int N);

struct GradNorms {
  /// ∫ Lip(u)^p dm
  MCEstimate lip_p;
  /// ∫ lip(u)^{N+p} / Lip(u)^N dm, with 0/0 := 0
  MCEstimate lower_integrand;
  bool analytic = false;
};

GradNorms grad_norm(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg);

/// Minkowski-shell quadrature on the unit sphere of the tangent space:
/// Σ_k weight_k f(direction_k) approximates ∫_{S_1} f dm⁺ as the two-point
/// Richardson combination 2 S(eps/2) - S(eps), where
/// S(e) = (1/e) ∫_{B_{1+e} \ B_1} f(w / |w|) dm.
struct ShellQuadrature {
  std::vector<Point> directions;
  std::vector<double> weights;
  double operator()(const std::function<double(const Point&)>& f) const;
};

ShellQuadrature make_shell_quadrature(const SpaceInstance& space, double eps, std::size_t n, std::uint64_t seed);

double shell_integral(const SpaceInstance& space, const std::function<double(const Point&)>& f, double eps,
                      std::size_t n, std::uint64_t seed);

/// ∫_X ∫_{S_1} |u_{0,x}(w)|^p / N dm⁺(w) dm(x).
MCEstimate K_norm(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg);

/// Sandwich C1 ∫ lip^{N+p}/Lip^N dm <= limit <= C2 ∫ Lip^p dm with
/// C1 = a / (2^{5N} 8^p) and C2 = 2b.
struct BoundReport {
  RescaledCurve curve;
  LimitFit fit;
  GradNorms norms;
  double N = 0.0;
  double a_hat = 0.0;
  double b_hat = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double lower_margin = 0.0;
  double upper_margin = 0.0;
  bool pass = false;
};

BoundReport bound_check(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg,
                        double a_hat, double b_hat);

}  // namespace bvy
