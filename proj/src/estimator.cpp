#include "bvy/estimator.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bvy/errors.hpp"
#include "bvy/lipcalc.hpp"
#include "bvy/parallel.hpp"

namespace bvy {
namespace {

constexpr std::size_t kPairChunk = 1 << 16;
constexpr std::size_t kOuterChunk = 1024;

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

// Threshold exponent N_bar/p + 1 and the comparison shared by every estimator.
struct SetPredicate {
  const SpaceInstance& space;
  const TestFunction& u;
  double lambda;
  double exponent;

  bool operator()(const Point& x, double ux, const Point& y) const {
    const double d = space.dist(x, y);
    if (d == 0.0) return false;
    return std::abs(ux - eval(space, u, y)) >= lambda * std::pow(d, exponent);
  }
};

bool boxes_overlap(const Box& a, const Box& b) {
  return (a.lo.array() <= b.hi.array()).all() && (b.lo.array() <= a.hi.array()).all();
}

double bvy_lipschitz(const SpaceInstance& space, const TestFunction& u) { return global_lip(space, u); }

bool localization_fits(const SpaceInstance& space, const TestFunction& u, double R) {
  const Box& s = u.support;
  if (space.kind() == SpaceKind::Heisenberg1) {
    double zmax = 0.0;
    for (double x : {s.lo[0], s.hi[0]})
      for (double y : {s.lo[1], s.hi[1]}) zmax = std::max(zmax, std::hypot(x, y));
    return space.window().contains(s.expanded(make_point({R, R, 0.25 * R * R + 0.5 * zmax * R})));
  }
  return space.window().contains(s.expanded(R));
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Auto: return "auto";
    case EstimatorKind::Direct: return "direct";
    case EstimatorKind::Localized: return "localized";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(std::string_view name) {
  for (auto k : {EstimatorKind::Auto, EstimatorKind::Direct, EstimatorKind::Localized})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

void validate(const BVYConfig& cfg) {
  if (!(cfg.p >= 1.0)) throw PreconditionError("p must be at least 1");
  if (!(cfg.N_bar > 0.0)) throw PreconditionError("N_bar must be positive");
  if (cfg.lambda_ladder.empty()) throw PreconditionError("lambda ladder is empty");
  for (std::size_t i = 0; i < cfg.lambda_ladder.size(); ++i) {
    if (!(cfg.lambda_ladder[i] > 0.0)) throw PreconditionError("lambda values must be positive");
    if (i > 0 && !(cfg.lambda_ladder[i] > cfg.lambda_ladder[i - 1]))
      throw PreconditionError("lambda ladder must be strictly increasing");
  }
  if (cfg.n_outer == 0 || cfg.n_inner == 0 || cfg.n_pairs == 0 || cfg.n_grad == 0 || cfg.n_shell == 0)
    throw PreconditionError("sample budgets must be positive");
  if (!(cfg.epsilon_loc >= 0.0)) throw PreconditionError("epsilon_loc must be nonnegative");
  if (!(cfg.shell_eps > 0.0 && cfg.shell_eps <= 0.05)) throw PreconditionError("shell_eps must lie in (0, 0.05]");
}

bool pair_in_E(const SpaceInstance& space, const TestFunction& u, double p, double N_bar, double lambda,
               const Point& x, const Point& y) {
  return SetPredicate{space, u, lambda, N_bar / p + 1.0}(x, eval(space, u, x), y);
}

MCEstimate pair_measure_direct(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg, double lambda) {
  const SetPredicate in_E{space, u, lambda, cfg.N_bar / cfg.p + 1.0};
  const std::size_t n = cfg.n_pairs;
  auto hits = map_chunks<std::size_t>(chunk_count(n, kPairChunk), [&](std::size_t c) {
    Stream rng(cfg.seed, StreamTag::Direct, c);
    const std::size_t count = std::min(kPairChunk, n - c * kPairChunk);
    std::size_t h = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const Point x = space.draw_window(rng);
      const Point y = space.draw_window(rng);
      if (in_E(x, eval(space, u, x), y)) ++h;
    }
    return h;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double mw = space.window_mass();
  const double f = static_cast<double>(total) / static_cast<double>(n);
  return {mw * mw * f, mw * mw * std::sqrt(f * (1.0 - f) / static_cast<double>(n)), n, cfg.seed};
}

double localization_radius(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg, double lambda) {
  const double L = bvy_lipschitz(space, u);
  return std::pow((1.0 + cfg.epsilon_loc) * L / lambda, cfg.p / cfg.N_bar);
}

double localization_limit(const SpaceInstance& space, const TestFunction& u) {
  if (!(support_margin(space, u) > 0.0)) return 0.25 * space.window().min_side();
  double lo = 0.0;
  double hi = space.window().min_side();
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (localization_fits(space, u, mid) ? lo : hi) = mid;
  }
  return lo;
}

MCEstimate pair_measure_localized(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg,
                                  double lambda) {
  if (!space.supports_ball_sampling())
    throw CapabilityError(std::string(to_string(space.kind())) + " does not support ball sampling");
  const double L = bvy_lipschitz(space, u);
  if (L == 0.0) return {0.0, 0.0, cfg.n_outer, cfg.seed};
  const double R = localization_radius(space, u, cfg, lambda);
  const double limit = localization_limit(space, u);
  if (!(R <= limit))
    throw PreconditionError(fmt::format("localization radius {:.4g} exceeds the admissible {:.4g} at lambda = {:.4g}; "
                                        "use lambda >= {:.4g}",
                                        R, limit, lambda, lambda * std::pow(R / limit, cfg.N_bar / cfg.p)));
  const SetPredicate in_E{space, u, lambda, cfg.N_bar / cfg.p + 1.0};
  const double volume = space.reference_ball_volume(R);
  const std::size_t n = cfg.n_outer;
  const std::size_t n_inner = cfg.n_inner;
  auto parts = map_chunks<Moments>(chunk_count(n, kOuterChunk), [&](std::size_t c) {
    Stream rng(cfg.seed, StreamTag::Localized, c);
    const std::size_t count = std::min(kOuterChunk, n - c * kOuterChunk);
    Moments m;
    for (std::size_t i = 0; i < count; ++i) {
      const Point x = space.draw_window(rng);
      // Sections of E at points whose R-ball misses the support are empty.
      if (!boxes_overlap(space.ball_bbox(x, R), u.support)) {
        m.add(0.0);
        continue;
      }
      const double ux = eval(space, u, x);
      double acc = 0.0;
      for (std::size_t j = 0; j < n_inner; ++j) {
        const Point y = space.draw_ball_proposal(x, R, rng);
        const double w = space.density(y);
        if (w > 0.0 && in_E(x, ux, y)) acc += w;
      }
      m.add(volume * acc / static_cast<double>(n_inner));
    }
    return m;
  });
  Moments total;
  for (const auto& m : parts) total.merge(m);
  const double mw = space.window_mass();
  return {mw * total.mean(), mw * total.std_error(), n, cfg.seed};
}

EstimatorKind choose_estimator(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg) {
  if (cfg.estimator != EstimatorKind::Auto) return cfg.estimator;
  if (!space.supports_ball_sampling()) return EstimatorKind::Direct;
  if (bvy_lipschitz(space, u) == 0.0) return EstimatorKind::Direct;
  const double R = localization_radius(space, u, cfg, cfg.lambda_ladder.front());
  return R <= localization_limit(space, u) ? EstimatorKind::Localized : EstimatorKind::Direct;
}

RescaledCurve rescaled_curve(const SpaceInstance& space, const TestFunction& u, const BVYConfig& cfg) {
  validate(cfg);
  const EstimatorKind kind = choose_estimator(space, u, cfg);
  RescaledCurve curve;
  curve.p = cfg.p;
  for (double lambda : cfg.lambda_ladder) {
    CurveRow row;
    row.lambda = lambda;
    row.estimator = kind;
    if (kind == EstimatorKind::Localized) {
      row.m_hat = pair_measure_localized(space, u, cfg, lambda);
      row.n_outer = cfg.n_outer;
      row.n_inner = cfg.n_inner;
    } else {
      row.m_hat = pair_measure_direct(space, u, cfg, lambda);
      row.n_outer = cfg.n_pairs;
      row.n_inner = 1;
    }
    const double scale = std::pow(lambda, cfg.p);
    row.rescaled = scale * row.m_hat.value;
    row.rescaled_std_error = scale * row.m_hat.std_error;
    curve.rows.push_back(row);
  }
  return curve;
}

LimitFit limit_fit(const RescaledCurve& curve) {
  const std::size_t k = curve.rows.size();
  if (k < 3) throw PreconditionError("limit_fit needs at least three rungs");
  LimitFit fit;
  fit.plateau_rungs = (k + 2) / 3;
  std::vector<double> top;
  for (std::size_t i = k - fit.plateau_rungs; i < k; ++i) top.push_back(curve.rows[i].rescaled);
  std::sort(top.begin(), top.end());
  const std::size_t m = top.size();
  fit.limit = m % 2 ? top[m / 2] : 0.5 * (top[m / 2 - 1] + top[m / 2]);

  for (const auto& row : curve.rows)
    if (!(row.rescaled > 0.0)) fit.diverges_to_zero = true;
  if (fit.diverges_to_zero) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.slope_stderr = std::numeric_limits<double>::quiet_NaN();
    fit.residual_rms = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  Eigen::MatrixXd X(k, 2);
  Eigen::VectorXd y(k);
  for (std::size_t i = 0; i < k; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(curve.rows[i].lambda);
    y(i) = std::log(curve.rows[i].rescaled);
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double centered = (X.col(1).array() - X.col(1).mean()).square().sum();
  fit.slope = beta(1);
  fit.residual_rms = std::sqrt(rss / static_cast<double>(k));
  fit.slope_stderr = std::sqrt(rss / static_cast<double>(k - 2) / centered);
  return fit;
}

bool monotone_within(const RescaledCurve& curve, double k) {
  for (std::size_t i = 1; i < curve.rows.size(); ++i) {
    const auto& a = curve.rows[i - 1].m_hat;
    const auto& b = curve.rows[i].m_hat;
    if (b.value - a.value > k * std::hypot(a.std_error, b.std_error)) return false;
  }
  return true;
}

double k_const(double p, int N) {
  if (N < 1) throw PreconditionError("k_const needs N >= 1");
  if (!(p >= 1.0)) throw PreconditionError("k_const needs p >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (N - 1)) * std::tgamma(0.5 * (p + 1.0)) /
         std::tgamma(0.5 * (N + p));
}

GradNorms grad_norm(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg) {
  const double N = space.hom_dim();
  LipConfig lip_cfg;
  const double reach = lip_cfg.radii.front();
  struct Acc {
    Moments upper, lower;
    bool analytic = true;
  };
  const std::size_t n = cfg.n_grad;
  auto parts = map_chunks<Acc>(chunk_count(n, kOuterChunk), [&](std::size_t c) {
    Stream rng(cfg.seed, StreamTag::GradNorm, c);
    const std::size_t count = std::min(kOuterChunk, n - c * kOuterChunk);
    Acc a;
    for (std::size_t i = 0; i < count; ++i) {
      const Point x = space.draw_window(rng);
      PointwiseLip pl;
      if (auto g = metric_gradient(space, u, x)) {
        const double v = gradient_norm(space, *g);
        pl = {v, v, true};
      } else if (boxes_overlap(space.ball_bbox(x, reach), u.support)) {
        LipConfig local = lip_cfg;
        local.seed = splitmix64(cfg.seed ^ splitmix64(c * kOuterChunk + i));
        pl = pointwise_lipschitz(space, u, x, local);
        a.analytic = false;
      }
      a.upper.add(std::pow(pl.Lip, p));
      a.lower.add(pl.Lip > 0.0 ? std::pow(pl.lip, N + p) / std::pow(pl.Lip, N) : 0.0);
    }
    return a;
  });
  Acc total;
  for (const auto& a : parts) {
    total.upper.merge(a.upper);
    total.lower.merge(a.lower);
    total.analytic = total.analytic && a.analytic;
  }
  const double mw = space.window_mass();
  GradNorms out;
  out.lip_p = {mw * total.upper.mean(), mw * total.upper.std_error(), n, cfg.seed};
  out.lower_integrand = {mw * total.lower.mean(), mw * total.lower.std_error(), n, cfg.seed};
  out.analytic = total.analytic;
  return out;
}

BoundReport bound_check(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg,
                        double a_hat, double b_hat) {
  if (!(a_hat > 0.0) || !(b_hat >= a_hat)) throw PreconditionError("density bounds need 0 < a_hat <= b_hat");
  BVYConfig local = cfg;
  local.p = p;
  local.N_bar = space.hom_dim();
  BoundReport r;
  r.curve = rescaled_curve(space, u, local);
  r.fit = limit_fit(r.curve);
  r.norms = grad_norm(space, u, p, local);
  r.N = space.hom_dim();
  r.a_hat = a_hat;
  r.b_hat = b_hat;
  r.C1 = a_hat / (std::pow(2.0, 5.0 * r.N) * std::pow(8.0, p));
  r.C2 = 2.0 * b_hat;
  r.lower = r.C1 * r.norms.lower_integrand.value;
  r.upper = r.C2 * r.norms.lip_p.value;
  r.lower_margin = r.fit.limit - r.lower;
  r.upper_margin = r.upper - r.fit.limit;
  r.pass = r.lower <= r.fit.limit && r.fit.limit <= r.upper;
  return r;
}

}  // namespace bvy
