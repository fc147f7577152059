#pragma once

#include <optional>
#include <string_view>

#include "bvy/space.hpp"

namespace bvy {

enum class FormulaId { Linear, SmoothBump, Cone, ProductSine, HeisCoord };

std::string_view to_string(FormulaId id);
FormulaId formula_id_from_string(std::string_view name);

/// Parameters of the catalogued formulas. Unused fields are ignored.
///
///  linear        slope * (x_1 - offset)                 support: given box (default: window)
///  smooth_bump   amplitude * prod (1 - s_i^2)^3,        s_i = (x_i - center_i) / half_width_i
///  cone          max(0, height - d(x, center))          d is the space metric
///  product_sine  amplitude * prod sin(frequency π (x_i - lo_i) / (hi_i - lo_i))  on the support box
///  heis_coord    (x_1 - center_1) * prod plateau_i(x_i - center_i)
///                plateau = 1 on |s| <= inner_i, C^1 smoothstep down to 0 at |s| = outer_i
struct FunctionParams {
  double slope = 1.0;
  double offset = 0.0;
  double amplitude = 1.0;
  double height = 0.2;
  double frequency = 1.0;
  Point center;
  Point half_width;
  Point inner;
  Point outer;
};

/// A catalogued Lipschitz function with bounded support, multiplied by `scale`.
struct TestFunction {
  FormulaId formula = FormulaId::Linear;
  FunctionParams params;
  Box support;
  double scale = 1.0;
  /// When false, all analytic metadata is withheld and estimators are used.
  bool analytic = true;

  TestFunction scaled(double c) const {
    TestFunction out = *this;
    out.scale *= c;
    return out;
  }
  TestFunction without_analytic() const {
    TestFunction out = *this;
    out.analytic = false;
    return out;
  }
};

/// Builds a catalogued function on `space`, deriving the support box where the
/// formula determines it. Throws ConfigError on inconsistent parameters.
TestFunction make_function(const SpaceInstance& space, FormulaId id, FunctionParams params,
                           std::optional<Box> support = std::nullopt);

TestFunction make_linear(const SpaceInstance& space, double slope = 1.0, double offset = 0.0);
TestFunction make_smooth_bump(const SpaceInstance& space, double amplitude, Point center, Point half_width);
TestFunction make_cone(const SpaceInstance& space, double height, Point center);
TestFunction make_product_sine(const SpaceInstance& space, double amplitude, double frequency, Box support);
TestFunction make_heis_coord(const SpaceInstance& space, Point center, Point inner, Point outer);

/// Distance from the support box to the window boundary (0 when they touch).
double support_margin(const SpaceInstance& space, const TestFunction& u);

/// u(x); exactly 0 outside the support box.
double eval(const SpaceInstance& space, const TestFunction& u, const Point& x);
double eval(const SpaceInstance& space, const TestFunction& u, const PointRef& x);

/// Coordinate partial derivatives at x, when the formula is differentiable there
/// and analytic metadata is enabled.
std::optional<Point> coordinate_gradient(const SpaceInstance& space, const TestFunction& u, const Point& x);

/// The differential that drives blow-ups: coordinate gradient on normed spaces,
/// horizontal gradient (X_1 u, X_2 u) on the Heisenberg group.
std::optional<Point> metric_gradient(const SpaceInstance& space, const TestFunction& u, const Point& x);

/// Norm of a metric gradient as a pointwise Lipschitz constant: the dual norm
/// on Banach boxes, the Euclidean norm otherwise.
double gradient_norm(const SpaceInstance& space, const Point& g);

/// Analytic global Lipschitz bound, when available.
std::optional<double> analytic_lipschitz_bound(const SpaceInstance& space, const TestFunction& u);

}  // namespace bvy
