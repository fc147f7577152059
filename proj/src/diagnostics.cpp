#include "bvy/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "bvy/errors.hpp"
#include "bvy/parallel.hpp"
#include "bvy/random.hpp"

namespace bvy {
namespace {

constexpr std::size_t kPointChunk = 64;
constexpr int kMaxRedraws = 10000;

std::vector<double> admissible_radii(const SpaceInstance& space, std::vector<double> radii) {
  if (radii.empty()) throw PreconditionError("radius ladder is empty");
  for (double r : radii)
    if (!(r > 0.0)) throw PreconditionError("radii must be positive");
  if (space.kind() == SpaceKind::FatCantor) {
    const double floor = space.cantor().min_gap / 4.0;
    std::erase_if(radii, [&](double r) { return r < floor; });
    if (radii.empty()) throw PreconditionError(fmt::format("FatCantor radii must be at least {:g}", floor));
  }
  return radii;
}

MassValue mass_at(const SpaceInstance& space, const Point& x, double r, const McBudget& mc, std::uint64_t index) {
  return ball_measure(space, x, r, McBudget{mc.n, splitmix64(mc.seed ^ splitmix64(index))});
}

// A window point whose ball of radius r stays inside W.
Point draw_interior(const SpaceInstance& space, double r, Stream& rng) {
  for (int i = 0; i < kMaxRedraws; ++i) {
    Point x = space.draw_window(rng);
    if (space.ball_inside_window(x, r)) return x;
  }
  throw PreconditionError(fmt::format("no window point keeps a ball of radius {:g} inside the window", r));
}

}  // namespace

DoublingReport estimate_beta(const SpaceInstance& space, std::size_t n_points, const std::vector<double>& r_ladder,
                             std::uint64_t seed, const DoublingOptions& opt) {
  if (n_points == 0) throw PreconditionError("estimate_beta needs points");
  const std::vector<double> radii = admissible_radii(space, r_ladder);
  const double window_scale = space.window().hi.maxCoeff() - space.window().lo.minCoeff();
  for (double r : radii)
    if (r > window_scale) throw PreconditionError("radius exceeds the window scale");

  auto parts = map_chunks<DoublingReport>(chunk_count(n_points, kPointChunk), [&](std::size_t c) {
    DoublingReport part;
    const std::size_t first = c * kPointChunk;
    const std::size_t last = std::min(n_points, first + kPointChunk);
    for (std::size_t i = first; i < last; ++i) {
      Stream rng(seed, StreamTag::Doubling, i);
      const Point x = space.draw_window(rng);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        if (!opt.include_boundary && !space.ball_inside_window(x, 2.0 * r)) {
          ++part.skipped_boundary;
          continue;
        }
        const MassValue inner = mass_at(space, x, r, opt.mc, 2 * (i * radii.size() + k));
        if (!(inner.value > 0.0)) {
          ++part.skipped_zero_mass;
          continue;
        }
        const MassValue outer = mass_at(space, x, 2.0 * r, opt.mc, 2 * (i * radii.size() + k) + 1);
        part.exact = part.exact && inner.exact && outer.exact;
        ++part.samples;
        const double ratio = outer.value / inner.value;
        if (part.worst_point.size() == 0 || ratio > part.beta_hat) {
          part.beta_hat = ratio;
          part.worst_point = x;
          part.worst_radius = r;
        }
      }
    }
    return part;
  });

  DoublingReport out;
  out.r_min = *std::min_element(radii.begin(), radii.end());
  out.r_max = *std::max_element(radii.begin(), radii.end());
  for (const auto& p : parts) {
    out.samples += p.samples;
    out.skipped_zero_mass += p.skipped_zero_mass;
    out.skipped_boundary += p.skipped_boundary;
    out.exact = out.exact && p.exact;
    if (p.worst_point.size() > 0 && (out.worst_point.size() == 0 || p.beta_hat > out.beta_hat)) {
      out.beta_hat = p.beta_hat;
      out.worst_point = p.worst_point;
      out.worst_radius = p.worst_radius;
    }
  }
  out.dimension_hat = std::log(out.beta_hat) / std::log(2.0);
  return out;
}

DensityReport estimate_density_bounds(const SpaceInstance& space, double N, std::size_t n_points,
                                      std::vector<double> r_ladder, std::uint64_t seed, const McBudget& mc) {
  if (!(N > 0.0)) throw PreconditionError("N must be positive");
  if (n_points == 0) throw PreconditionError("estimate_density_bounds needs points");
  std::vector<double> radii = admissible_radii(space, std::move(r_ladder));
  std::sort(radii.begin(), radii.end(), std::greater<>());
  const double r_top = radii.front();

  struct Part {
    std::vector<Point> points;
    std::vector<std::vector<double>> traces;
  };
  auto parts = map_chunks<Part>(chunk_count(n_points, kPointChunk), [&](std::size_t c) {
    Part part;
    const std::size_t first = c * kPointChunk;
    const std::size_t last = std::min(n_points, first + kPointChunk);
    for (std::size_t i = first; i < last; ++i) {
      Stream rng(seed, StreamTag::Density, i);
      const Point x = draw_interior(space, r_top, rng);
      std::vector<double> trace;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        const MassValue m = mass_at(space, x, radii[k], mc, i * radii.size() + k);
        trace.push_back(m.value / std::pow(radii[k], N));
      }
      part.points.push_back(x);
      part.traces.push_back(std::move(trace));
    }
    return part;
  });

  DensityReport out;
  out.N = N;
  out.radii = radii;
  out.a_hat = std::numeric_limits<double>::infinity();
  out.b_hat = 0.0;
  for (auto& p : parts) {
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      out.a_hat = std::min(out.a_hat, p.traces[i].back());
      out.b_hat = std::max(out.b_hat, p.traces[i].back());
      out.points.push_back(std::move(p.points[i]));
      out.traces.push_back(std::move(p.traces[i]));
    }
  }
  return out;
}

void write_traces_csv(const DensityReport& report, std::ostream& out) {
  out << "point_id,r,ratio\n";
  for (std::size_t i = 0; i < report.traces.size(); ++i)
    for (std::size_t k = 0; k < report.radii.size(); ++k)
      out << fmt::format("{},{:.17g},{:.17g}\n", i, report.radii[k], report.traces[i][k]);
}

VolumeLowerReport check_volume_lower(const SpaceInstance& space, double beta, std::size_t n_trials, std::uint64_t seed,
                                     const VolumeLowerOptions& opt) {
  if (!(beta >= 1.0)) throw PreconditionError("beta must be at least 1");
  if (n_trials == 0) throw PreconditionError("check_volume_lower needs trials");
  const double side = space.window().min_side();
  double r_min = opt.r_min > 0.0 ? opt.r_min : 1e-3 * side;
  const double r_max = opt.r_max > 0.0 ? opt.r_max : 0.2 * side;
  if (space.kind() == SpaceKind::FatCantor) r_min = std::max(r_min, space.cantor().min_gap / 4.0);
  if (!(r_min < r_max)) throw PreconditionError("empty radius range");
  const double exponent = std::log(beta) / std::log(2.0);
  const double log_span = std::log(r_max / r_min);

  struct Part {
    std::size_t violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    VolumeTuple witness;
  };
  auto parts = map_chunks<Part>(chunk_count(n_trials, kPointChunk), [&](std::size_t c) {
    Part part;
    const std::size_t first = c * kPointChunk;
    const std::size_t last = std::min(n_trials, first + kPointChunk);
    for (std::size_t i = first; i < last; ++i) {
      Stream rng(seed, StreamTag::VolumeLower, i);
      VolumeTuple t;
      int tries = 0;
      do {
        if (++tries > kMaxRedraws) throw PreconditionError("no admissible (x0, r0) inside the window");
        t.x0 = space.draw_window(rng);
        t.r0 = r_min * std::exp(rng.uniform() * log_span);
      } while (!space.ball_inside_window(t.x0, 2.0 * t.r0));
      tries = 0;
      do {
        if (++tries > kMaxRedraws) throw PreconditionError("no support point near x0");
        t.x = space.draw_ball_proposal(t.x0, t.r0, rng);
      } while (!(space.in_support(t.x) && space.dist(t.x0, t.x) < t.r0));
      t.r = t.r0 * std::exp(-rng.uniform() * std::log(t.r0 / r_min));

      const MassValue num = mass_at(space, t.x, t.r, opt.mc, 2 * i);
      const MassValue den = mass_at(space, t.x0, t.r0, opt.mc, 2 * i + 1);
      t.lhs = num.value / den.value;
      t.rhs = std::pow(t.r / t.r0, exponent) / (beta * beta);
      double tol = 0.0;
      if (!num.exact || !den.exact)
        tol = 3.0 * t.lhs * std::hypot(num.std_error / num.value, den.std_error / den.value);
      if (t.lhs + tol < t.rhs) ++part.violations;
      const double slack = t.lhs / t.rhs - 1.0;
      if (slack < part.min_slack) {
        part.min_slack = slack;
        part.witness = t;
      }
    }
    return part;
  });

  VolumeLowerReport out;
  out.beta = beta;
  out.n_trials = n_trials;
  out.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    out.violations += p.violations;
    if (p.min_slack < out.min_slack) {
      out.min_slack = p.min_slack;
      out.witness = p.witness;
    }
  }
  out.pass = out.violations == 0;
  return out;
}

}  // namespace bvy
