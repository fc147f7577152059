#include "bvy/lipcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bvy/errors.hpp"
#include "bvy/parallel.hpp"

namespace bvy {
namespace {

// Sup-slope over n draws in B_s(x) intersected with the support of m.
double sup_slope(const SpaceInstance& space, const TestFunction& u, const Point& x, double ux, double s, std::size_t n,
                 Stream& rng) {
  double best = 0.0;
  std::size_t got = 0;
  std::size_t tries = 0;
  const std::size_t max_tries = 64 * n + 1024;
  while (got < n && tries < max_tries) {
    ++tries;
    Point y = space.draw_ball_proposal(x, s, rng);
    if (got % 2 == 0) {
      const Point w = space.offset(x, y);
      const double g = space.gauge(w);
      if (g == 0.0) continue;
      y = space.translate(x, space.scale(w, s * (1.0 - 1e-12) / g));
    }
    if (!space.in_support(y)) continue;
    ++got;
    best = std::max(best, std::abs(eval(space, u, y) - ux) / s);
  }
  return best;
}

}  // namespace

LipLadder lip_ladder(const SpaceInstance& space, const TestFunction& u, const Point& x, const std::vector<double>& radii,
                     std::size_t n_per_radius, std::uint64_t seed, int subrungs) {
  if (radii.empty()) throw PreconditionError("lip_ladder needs at least one radius");
  if (n_per_radius < 16) throw PreconditionError("lip_ladder needs at least 16 samples per radius");
  if (subrungs < 1) throw PreconditionError("lip_ladder needs at least one sub-rung");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw PreconditionError("radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("radii must be strictly decreasing");
  }
  const std::size_t k = radii.size();
  const double ux = eval(space, u, x);
  // Sub-ladder of rung i spans (r_{i+1}, r_i]; the last rung reuses the previous ratio.
  auto rung_ratio = [&](std::size_t i) {
    if (i + 1 < k) return radii[i + 1] / radii[i];
    return k > 1 ? radii[k - 1] / radii[k - 2] : 0.5;
  };
  auto per_rung = map_chunks<std::pair<double, double>>(k, [&](std::size_t i) {
    Stream rng(seed, StreamTag::LipLadder, i);
    const double ratio = rung_ratio(i);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int j = 0; j < subrungs; ++j) {
      const double s = radii[i] * std::pow(ratio, static_cast<double>(j) / subrungs);
      const double v = sup_slope(space, u, x, ux, s, n_per_radius, rng);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::make_pair(lo, hi);
  });
  LipLadder out{radii, std::vector<double>(k), std::vector<double>(k)};
  double run_min = std::numeric_limits<double>::infinity();
  double run_max = 0.0;
  for (std::size_t i = k; i-- > 0;) {
    run_min = std::min(run_min, per_rung[i].first);
    run_max = std::max(run_max, per_rung[i].second);
    out.l_vals[i] = run_min;
    out.L_vals[i] = run_max;
  }
  return out;
}

PointwiseLip pointwise_lipschitz(const SpaceInstance& space, const TestFunction& u, const Point& x,
                                 const LipConfig& cfg) {
  if (cfg.prefer_analytic) {
    if (auto g = metric_gradient(space, u, x)) {
      const double v = gradient_norm(space, *g);
      return {v, v, true};
    }
  }
  const LipLadder ladder = lip_ladder(space, u, x, cfg.radii, cfg.n_per_radius, cfg.seed, cfg.subrungs);
  return {ladder.l_vals.back(), ladder.L_vals.back(), false};
}

double global_lip(const SpaceInstance& space, const TestFunction& u, const GlobalLipConfig& cfg) {
  if (auto bound = analytic_lipschitz_bound(space, u)) return *bound;
  // Half the pairs are independent window draws, half are short-range pairs at
  // log-uniform scales so that local slopes are seen.
  const std::size_t chunk = 4096;
  const double scale_hi = space.window().min_side() / 4.0;
  const double scale_lo = scale_hi * 1e-4;
  auto parts = map_chunks<double>(chunk_count(cfg.n_pairs, chunk), [&](std::size_t c) {
    Stream rng(cfg.seed, StreamTag::GlobalLip, c);
    const std::size_t count = std::min(chunk, cfg.n_pairs - c * chunk);
    double best = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const Point x = space.draw_window(rng);
      Point y;
      if (i % 2 == 0) {
        y = space.draw_window(rng);
      } else {
        const double r = scale_lo * std::pow(scale_hi / scale_lo, rng.uniform());
        y = space.draw_ball_proposal(x, r, rng);
        if (!space.in_support(y)) continue;
      }
      const double d = space.dist(x, y);
      if (d > 0.0) best = std::max(best, std::abs(eval(space, u, x) - eval(space, u, y)) / d);
    }
    return best;
  });
  return cfg.inflation * *std::max_element(parts.begin(), parts.end());
}

Blowup blowup(const SpaceInstance& space, const TestFunction& u, const Point& x) {
  if (!space.supports_dilation())
    throw CapabilityError(std::string(to_string(space.kind())) + " has no tangent blow-up");
  auto g = metric_gradient(space, u, x);
  if (!g) throw CapabilityError("no analytic differential for " + std::string(to_string(u.formula)) + " at this point");
  return Blowup(space.kind(), *g);
}

double blowup_residual(const SpaceInstance& space, const TestFunction& u, const Point& x, double delta, std::size_t n,
                       std::uint64_t seed) {
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  const Blowup b = blowup(space, u, x);
  Stream rng(seed, StreamTag::Blowup, 0);
  const double ux = eval(space, u, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point y = space.draw_ball_proposal(x, delta, rng);
    const Point w = space.scale(space.offset(x, y), 1.0 / delta);
    worst = std::max(worst, std::abs((eval(space, u, y) - ux) / delta - b(w)));
  }
  return worst;
}

}  // namespace bvy
