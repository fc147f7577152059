#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bvy/space.hpp"

namespace bvy {

struct DoublingOptions {
  /// Also use balls with B_{2r}(x) leaving the window (truncated by W).
  bool include_boundary = false;
  /// Budget for balls without a closed-form mass.
  McBudget mc{20000, 3};
};

struct DoublingReport {
  double beta_hat = 1.0;
  double dimension_hat = 0.0;
  std::size_t samples = 0;
  /// Pairs skipped because the inner ball had zero mass.
  std::size_t skipped_zero_mass = 0;
  /// Pairs skipped because B_{2r}(x) leaves the window.
  std::size_t skipped_boundary = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  Point worst_point;
  double worst_radius = 0.0;
  bool exact = true;
};

/// β̂ = max m(B_{2r}(x) ∩ W) / m(B_r(x) ∩ W) over n_points window draws and
/// the radii of r_ladder (FatCantor radii below min_gap/4 are dropped).
/// Point i uses its own stream, so β̂ is a running max in n_points.
DoublingReport estimate_beta(const SpaceInstance& space, std::size_t n_points, const std::vector<double>& r_ladder,
                             std::uint64_t seed, const DoublingOptions& opt = {});

struct DensityReport {
  double N = 0.0;
  double a_hat = 0.0;
  double b_hat = 0.0;
  /// Decreasing radii shared by every trace.
  std::vector<double> radii;
  std::vector<Point> points;
  /// traces[i][k] = m(B_{radii[k]}(points[i])) / radii[k]^N
  std::vector<std::vector<double>> traces;
};

/// Traces r -> m(B_r(x)) / r^N at n_points draws whose largest ball lies in
/// the window; a_hat and b_hat are the min and max of the final-rung values.
DensityReport estimate_density_bounds(const SpaceInstance& space, double N, std::size_t n_points,
                                      std::vector<double> r_ladder, std::uint64_t seed, const McBudget& mc = {20000, 5});

/// CSV with columns point_id, r, ratio.
void write_traces_csv(const DensityReport& report, std::ostream& out);

struct VolumeTuple {
  Point x0;
  double r0 = 0.0;
  Point x;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct VolumeLowerOptions {
  /// Radii are drawn log-uniformly in [r_min, r_max]; nonpositive values mean
  /// 1e-3 and 0.2 times the shortest window side.
  double r_min = 0.0;
  double r_max = 0.0;
  McBudget mc{20000, 9};
};

struct VolumeLowerReport {
  double beta = 0.0;
  std::size_t n_trials = 0;
  std::size_t violations = 0;
  /// Smallest lhs / rhs - 1 over all tuples.
  double min_slack = 0.0;
  VolumeTuple witness;
  bool pass = false;
};

/// Samples x0, r0 with B_{2 r0}(x0) inside W, x in B_{r0}(x0) and r <= r0, and
/// checks m(B_r(x)) / m(B_{r0}(x0)) >= β^{-2} (r / r0)^{log β / log 2}.
/// Monte Carlo masses get three standard errors of slack.
VolumeLowerReport check_volume_lower(const SpaceInstance& space, double beta, std::size_t n_trials, std::uint64_t seed,
                                     const VolumeLowerOptions& opt = {});

}  // namespace bvy
