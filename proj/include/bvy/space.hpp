#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bvy/random.hpp"

namespace bvy {

inline constexpr int kMaxDim = 3;

/// Coordinates of a point; at most three of them, stored inline.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

Point make_point(std::initializer_list<double> coords);

/// Axis-aligned box [lo, hi].
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  double min_side() const;
  bool contains(const Point& x) const;
  bool contains(const Box& other) const;
  Box expanded(double r) const;
  Box expanded(const Point& r) const;
  Point center() const { return (lo + hi) / 2.0; }
};

enum class SpaceKind { EuclideanBox, WeightedEuclidean, BanachBox, Heisenberg1, FatCantor };

std::string_view to_string(SpaceKind kind);
SpaceKind space_kind_from_string(std::string_view name);

enum class WeightId { Unit, Sine };

std::string_view to_string(WeightId id);
WeightId weight_id_from_string(std::string_view name);

/// Density w of a weighted Euclidean measure with a_w <= w <= b_w on the window.
struct WeightSpec {
  WeightId id = WeightId::Unit;
  double a_w = 1.0;
  double b_w = 1.0;

  double operator()(const Point& x) const;
  bool constant() const { return a_w == b_w; }
};

struct Interval {
  double lo;
  double hi;
};

/// Finite-depth fat Cantor set: at step k the middle fraction ratio^k of every
/// surviving interval is removed. All surviving intervals have equal length.
struct CantorSpec {
  double ratio = 0.25;
  int depth = 12;
  std::vector<Interval> intervals;
  double piece_length = 0.0;
  double total_length = 0.0;
  double min_gap = 0.0;
};

/// Mass of a set under m. `std_error` is zero for exact values.
struct MassValue {
  double value = 0.0;
  bool exact = false;
  double std_error = 0.0;
};

/// One metric measure space of the catalogue, restricted to a bounded window.
/// Immutable after construction.
class SpaceInstance {
 public:
  static SpaceInstance euclidean_box(Box window);
  static SpaceInstance weighted_euclidean(Box window, WeightId weight = WeightId::Sine);
  static SpaceInstance banach_box(Box window, double q);
  static SpaceInstance heisenberg(Box window);
  static SpaceInstance fat_cantor(double ratio = 0.25, int depth = 12, double lo = 0.0, double hi = 1.0);

  SpaceKind kind() const { return kind_; }
  int topo_dim() const { return window_.dim(); }
  double hom_dim() const { return kind_ == SpaceKind::Heisenberg1 ? 4.0 : static_cast<double>(topo_dim()); }
  const Box& window() const { return window_; }
  double q() const { return q_; }
  const WeightSpec& weight() const { return weight_; }
  const CantorSpec& cantor() const { return cantor_; }
  std::uint64_t tag() const { return tag_; }

  bool supports_ball_sampling() const { return kind_ != SpaceKind::FatCantor; }
  bool supports_dilation() const;

  /// Metric d(x, y).
  double dist(const Point& x, const Point& y) const;
  /// Homogeneous norm of a tangent vector: d(0, w) in the tangent space.
  double gauge(const Point& w) const;
  /// y^{-1}-translate: the tangent vector carrying x to y (x^{-1} y, or y - x).
  Point offset(const Point& x, const Point& y) const;
  /// Inverse of offset: x translated by w (x w, or x + w).
  Point translate(const Point& x, const Point& w) const;
  /// Dilation about the origin of the tangent space.
  Point scale(const Point& w, double s) const;

  /// Radon-Nikodym density of m with respect to the reference (Lebesgue/Haar)
  /// measure; zero outside the window and, for FatCantor, off the surviving set.
  double density(const Point& y) const;
  double max_density() const;
  bool in_support(const Point& y) const { return density(y) > 0.0; }

  /// m(W).
  double window_mass() const;
  /// Reference-measure volume of any ball of radius r (translation invariant).
  double reference_ball_volume(double r) const;

  /// One draw with law m|_W / m(W).
  Point draw_window(Stream& rng) const;
  /// One draw uniform under the reference measure on the full ball B_r(c),
  /// ignoring the window.
  Point draw_ball_proposal(const Point& c, double r, Stream& rng) const;

  /// Coordinate bounding box of B_r(c).
  Box ball_bbox(const Point& c, double r) const;
  bool ball_inside_window(const Point& c, double r) const;

  /// m(B_r(c) ∩ W) when a closed form is available.
  std::optional<double> exact_ball_mass(const Point& c, double r) const;

  /// Reference-measure integral of the density over [a, b] (1-D windows only).
  double interval_mass(double a, double b) const;

 private:
  SpaceInstance(SpaceKind kind, Box window);
  void finalize_tag();

  SpaceKind kind_;
  Box window_;
  double q_ = 2.0;
  WeightSpec weight_;
  CantorSpec cantor_;
  std::uint64_t tag_ = 0;
};

/// A point together with the identity of the space it belongs to.
struct PointRef {
  Point coords;
  std::uint64_t space_tag = 0;
};

/// Wraps coordinates as a point of `space`; throws DomainError when they lie
/// outside the closed window (or off the surviving set for FatCantor).
PointRef make_point_ref(const SpaceInstance& space, const Point& coords);

/// Sample points with their common mass.
struct PointSample {
  std::vector<PointRef> points;
  MassValue mass;
};

/// Budget for Monte Carlo mass estimates.
struct McBudget {
  std::size_t n = 200000;
  std::uint64_t seed = 1;
};

double distance(const SpaceInstance& space, const PointRef& x, const PointRef& y);

/// n i.i.d. points with law m|_W / m(W), and m(W).
PointSample sample_window(const SpaceInstance& space, std::uint64_t seed, std::size_t n);

/// n i.i.d. points with law m restricted to B_r(center) ∩ W, and that mass.
PointSample sample_ball(const SpaceInstance& space, const PointRef& center, double r, std::uint64_t seed,
                        std::size_t n);

/// m(B_r(center) ∩ W); exact where a closed form exists.
MassValue ball_measure(const SpaceInstance& space, const PointRef& center, double r, const McBudget& budget = {});
MassValue ball_measure(const SpaceInstance& space, const Point& center, double r, const McBudget& budget = {});

/// Hit-or-miss Monte Carlo estimate of m(B_r(center) ∩ W), never closed form.
MassValue ball_measure_mc(const SpaceInstance& space, const Point& center, double r, const McBudget& budget);

/// base + s (x - base), or base δ_s(base^{-1} x) on the Heisenberg group.
PointRef dilate(const SpaceInstance& space, const PointRef& base, const PointRef& x, double s);

/// Heisenberg group H^1 in exponential coordinates (x, y, t) with
/// (x,y,t)(x',y',t') = (x+x', y+y', t+t' + (x y' - y x')/2) and the Korányi
/// gauge (|z|^4 + 16 t^2)^{1/4}.
namespace heisenberg {
Point mul(const Point& a, const Point& b);
Point inv(const Point& a);
Point dilation(const Point& w, double s);
double gauge(const Point& w);
/// Haar (Lebesgue) volume of the unit Korányi ball, π²/8.
double unit_ball_volume();
}  // namespace heisenberg

/// Volume of the unit ℓq ball in R^n (q = +inf allowed).
double lq_unit_ball_volume(int n, double q);
/// ℓq norm (q = +inf allowed).
double lq_norm(const Point& v, double q);
/// Hölder conjugate exponent.
double dual_exponent(double q);

}  // namespace bvy
