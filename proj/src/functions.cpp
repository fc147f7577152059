#include "bvy/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bvy/errors.hpp"

namespace bvy {
namespace {

constexpr double kPi = std::numbers::pi;

// Biweight-cubed profile (1 - s^2)^3 on |s| < 1.
double bump_profile(double s) {
  const double a = 1.0 - s * s;
  return a > 0.0 ? a * a * a : 0.0;
}
double bump_derivative(double s) {
  const double a = 1.0 - s * s;
  return a > 0.0 ? -6.0 * s * a * a : 0.0;
}
// max |d/ds (1 - s^2)^3|, attained at s = 1/sqrt(5).
const double kBumpSlope = 96.0 / (25.0 * std::sqrt(5.0));

double plateau(double s, double inner, double outer) {
  const double a = std::abs(s);
  if (a <= inner) return 1.0;
  if (a >= outer) return 0.0;
  const double tau = (outer - a) / (outer - inner);
  return tau * tau * (3.0 - 2.0 * tau);
}
double plateau_derivative(double s, double inner, double outer) {
  const double a = std::abs(s);
  if (a <= inner || a >= outer) return 0.0;
  const double tau = (outer - a) / (outer - inner);
  return -(s > 0 ? 1.0 : -1.0) * 6.0 * tau * (1.0 - tau) / (outer - inner);
}

void require_dim(const Point& p, int n, const char* what) {
  if (p.size() != n) throw ConfigError(std::string(what) + " must have one entry per coordinate");
}

// Gradient of the norm of the space at v != 0, when it exists.
std::optional<Point> norm_gradient(const SpaceInstance& space, const Point& v) {
  const int n = static_cast<int>(v.size());
  if (space.kind() == SpaceKind::Heisenberg1) return std::nullopt;
  const double q = space.kind() == SpaceKind::BanachBox ? space.q() : 2.0;
  Point g = Point::Zero(n);
  if (v.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
  if (n == 1) {
    g[0] = v[0] > 0 ? 1.0 : -1.0;
    return g;
  }
  if (std::isinf(q)) {
    Eigen::Index k;
    const double m = v.cwiseAbs().maxCoeff(&k);
    for (int i = 0; i < n; ++i)
      if (i != k && std::abs(v[i]) == m) return std::nullopt;
    g[k] = v[k] > 0 ? 1.0 : -1.0;
    return g;
  }
  if (q == 1.0) {
    for (int i = 0; i < n; ++i) {
      if (v[i] == 0.0) return std::nullopt;
      g[i] = v[i] > 0 ? 1.0 : -1.0;
    }
    return g;
  }
  const double norm = lq_norm(v, q);
  for (int i = 0; i < n; ++i)
    g[i] = (v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0)) * std::pow(std::abs(v[i]) / norm, q - 1.0);
  return g;
}

// Per-coordinate bounds on |∂_i u| and a bound on |u|, before scaling.
struct PartialBounds {
  Point partial;
  double sup = 0.0;
};

PartialBounds partial_bounds(const SpaceInstance& space, const TestFunction& u) {
  const int n = space.topo_dim();
  const auto& p = u.params;
  PartialBounds b{Point::Zero(n), 0.0};
  switch (u.formula) {
    case FormulaId::Linear:
      b.partial[0] = std::abs(p.slope);
      b.sup = std::abs(p.slope) * std::max(std::abs(u.support.lo[0] - p.offset), std::abs(u.support.hi[0] - p.offset));
      break;
    case FormulaId::SmoothBump:
      for (int i = 0; i < n; ++i) b.partial[i] = std::abs(p.amplitude) * kBumpSlope / p.half_width[i];
      b.sup = std::abs(p.amplitude);
      break;
    case FormulaId::ProductSine:
      for (int i = 0; i < n; ++i)
        b.partial[i] = std::abs(p.amplitude) * p.frequency * kPi / (u.support.hi[i] - u.support.lo[i]);
      b.sup = std::abs(p.amplitude);
      break;
    case FormulaId::HeisCoord: {
      const double reach = p.outer[0];
      for (int i = 0; i < n; ++i) b.partial[i] = reach * 1.5 / (p.outer[i] - p.inner[i]);
      b.partial[0] += 1.0;
      b.sup = reach;
      break;
    }
    case FormulaId::Cone:
      b.partial.setConstant(1.0);
      b.sup = p.height;
      break;
  }
  return b;
}

}  // namespace

std::string_view to_string(FormulaId id) {
  switch (id) {
    case FormulaId::Linear: return "linear";
    case FormulaId::SmoothBump: return "smooth_bump";
    case FormulaId::Cone: return "cone";
    case FormulaId::ProductSine: return "product_sine";
    case FormulaId::HeisCoord: return "heis_coord";
  }
  return "?";
}

FormulaId formula_id_from_string(std::string_view name) {
  for (auto id : {FormulaId::Linear, FormulaId::SmoothBump, FormulaId::Cone, FormulaId::ProductSine,
                  FormulaId::HeisCoord})
    if (to_string(id) == name) return id;
  throw ConfigError("unknown formula_id '" + std::string(name) + "'");
}

TestFunction make_function(const SpaceInstance& space, FormulaId id, FunctionParams params,
                           std::optional<Box> support) {
  const int n = space.topo_dim();
  TestFunction u;
  u.formula = id;
  switch (id) {
    case FormulaId::Linear:
      u.support = space.window();
      if (support && !(support->lo == space.window().lo && support->hi == space.window().hi))
        throw ConfigError("linear functions are supported on the whole window");
      break;
    case FormulaId::SmoothBump:
      require_dim(params.center, n, "center");
      require_dim(params.half_width, n, "half_width");
      if ((params.half_width.array() <= 0.0).any()) throw ConfigError("half_width must be positive");
      u.support = Box{params.center - params.half_width, params.center + params.half_width};
      break;
    case FormulaId::Cone:
      require_dim(params.center, n, "center");
      if (!(params.height > 0.0)) throw ConfigError("cone height must be positive");
      u.support = space.ball_bbox(params.center, params.height);
      break;
    case FormulaId::ProductSine:
      if (!support) throw ConfigError("product_sine needs a support_box");
      if (!(params.frequency >= 1.0) || params.frequency != std::floor(params.frequency))
        throw ConfigError("product_sine frequency must be a positive integer");
      u.support = *support;
      break;
    case FormulaId::HeisCoord:
      require_dim(params.center, n, "center");
      require_dim(params.inner, n, "inner");
      require_dim(params.outer, n, "outer");
      if ((params.inner.array() < 0.0).any() || (params.outer.array() <= params.inner.array()).any())
        throw ConfigError("heis_coord needs 0 <= inner < outer");
      u.support = Box{params.center - params.outer, params.center + params.outer};
      break;
  }
  if (u.support.dim() != n) throw ConfigError("support_box has the wrong dimension");
  if (!space.window().contains(u.support)) throw ConfigError("support_box must lie inside the window");
  u.params = std::move(params);
  return u;
}

TestFunction make_linear(const SpaceInstance& space, double slope, double offset) {
  FunctionParams p;
  p.slope = slope;
  p.offset = offset;
  return make_function(space, FormulaId::Linear, p);
}

TestFunction make_smooth_bump(const SpaceInstance& space, double amplitude, Point center, Point half_width) {
  FunctionParams p;
  p.amplitude = amplitude;
  p.center = std::move(center);
  p.half_width = std::move(half_width);
  return make_function(space, FormulaId::SmoothBump, p);
}

TestFunction make_cone(const SpaceInstance& space, double height, Point center) {
  FunctionParams p;
  p.height = height;
  p.center = std::move(center);
  return make_function(space, FormulaId::Cone, p);
}

TestFunction make_product_sine(const SpaceInstance& space, double amplitude, double frequency, Box support) {
  FunctionParams p;
  p.amplitude = amplitude;
  p.frequency = frequency;
  return make_function(space, FormulaId::ProductSine, p, std::move(support));
}

TestFunction make_heis_coord(const SpaceInstance& space, Point center, Point inner, Point outer) {
  FunctionParams p;
  p.center = std::move(center);
  p.inner = std::move(inner);
  p.outer = std::move(outer);
  return make_function(space, FormulaId::HeisCoord, p);
}

double support_margin(const SpaceInstance& space, const TestFunction& u) {
  const Box& w = space.window();
  return std::min((u.support.lo - w.lo).minCoeff(), (w.hi - u.support.hi).minCoeff());
}

double eval(const SpaceInstance& space, const TestFunction& u, const Point& x) {
  if (!u.support.contains(x)) return 0.0;
  const auto& p = u.params;
  const int n = static_cast<int>(x.size());
  double v = 0.0;
  switch (u.formula) {
    case FormulaId::Linear:
      v = p.slope * (x[0] - p.offset);
      break;
    case FormulaId::SmoothBump:
      v = p.amplitude;
      for (int i = 0; i < n; ++i) v *= bump_profile((x[i] - p.center[i]) / p.half_width[i]);
      break;
    case FormulaId::Cone:
      v = std::max(0.0, p.height - space.dist(x, p.center));
      break;
    case FormulaId::ProductSine:
      v = p.amplitude;
      for (int i = 0; i < n; ++i)
        v *= std::sin(p.frequency * kPi * (x[i] - u.support.lo[i]) / (u.support.hi[i] - u.support.lo[i]));
      break;
    case FormulaId::HeisCoord:
      v = x[0] - p.center[0];
      for (int i = 0; i < n; ++i) v *= plateau(x[i] - p.center[i], p.inner[i], p.outer[i]);
      break;
  }
  return u.scale * v;
}

double eval(const SpaceInstance& space, const TestFunction& u, const PointRef& x) {
  if (x.space_tag != space.tag()) throw DomainError("point belongs to another space");
  return eval(space, u, x.coords);
}

std::optional<Point> coordinate_gradient(const SpaceInstance& space, const TestFunction& u, const Point& x) {
  if (!u.analytic) return std::nullopt;
  const int n = static_cast<int>(x.size());
  const auto& p = u.params;
  Point g = Point::Zero(n);
  if (!u.support.contains(x)) return g;
  switch (u.formula) {
    case FormulaId::Linear:
      g[0] = p.slope;
      break;
    case FormulaId::SmoothBump:
      for (int i = 0; i < n; ++i) {
        double d = p.amplitude * bump_derivative((x[i] - p.center[i]) / p.half_width[i]) / p.half_width[i];
        for (int j = 0; j < n; ++j)
          if (j != i) d *= bump_profile((x[j] - p.center[j]) / p.half_width[j]);
        g[i] = d;
      }
      break;
    case FormulaId::Cone: {
      const double r = space.dist(x, p.center);
      if (r > p.height) return g;
      if (r == p.height) return std::nullopt;
      auto ng = norm_gradient(space, x - p.center);
      if (!ng) return std::nullopt;
      g = -*ng;
      break;
    }
    case FormulaId::ProductSine:
      for (int i = 0; i < n; ++i) {
        const double k = p.frequency * kPi / (u.support.hi[i] - u.support.lo[i]);
        double d = p.amplitude * k * std::cos(k * (x[i] - u.support.lo[i]));
        for (int j = 0; j < n; ++j)
          if (j != i) d *= std::sin(p.frequency * kPi * (x[j] - u.support.lo[j]) / (u.support.hi[j] - u.support.lo[j]));
        g[i] = d;
      }
      break;
    case FormulaId::HeisCoord: {
      Point rho(n), drho(n);
      for (int i = 0; i < n; ++i) {
        rho[i] = plateau(x[i] - p.center[i], p.inner[i], p.outer[i]);
        drho[i] = plateau_derivative(x[i] - p.center[i], p.inner[i], p.outer[i]);
      }
      const double lead = x[0] - p.center[0];
      for (int i = 0; i < n; ++i) {
        double d = lead * drho[i];
        for (int j = 0; j < n; ++j)
          if (j != i) d *= rho[j];
        g[i] = d;
      }
      g[0] += rho.prod();
      break;
    }
  }
  return (u.scale * g).eval();
}

std::optional<Point> metric_gradient(const SpaceInstance& space, const TestFunction& u, const Point& x) {
  auto g = coordinate_gradient(space, u, x);
  if (!g || space.kind() != SpaceKind::Heisenberg1) return g;
  Point h(2);
  h[0] = (*g)[0] - 0.5 * x[1] * (*g)[2];
  h[1] = (*g)[1] + 0.5 * x[0] * (*g)[2];
  return h;
}

double gradient_norm(const SpaceInstance& space, const Point& g) {
  if (space.kind() == SpaceKind::BanachBox && g.size() > 1) return lq_norm(g, dual_exponent(space.q()));
  return g.norm();
}

std::optional<double> analytic_lipschitz_bound(const SpaceInstance& space, const TestFunction& u) {
  if (!u.analytic) return std::nullopt;
  const double c = std::abs(u.scale);
  if (u.formula == FormulaId::Cone) return c;
  const PartialBounds b = partial_bounds(space, u);
  switch (space.kind()) {
    case SpaceKind::BanachBox:
      return c * (b.partial.size() == 1 ? b.partial[0] : lq_norm(b.partial, dual_exponent(space.q())));
    case SpaceKind::Heisenberg1: {
      // Split q = p (a,b,0) (0,0,s): the horizontal leg costs at most G_H |(a,b)| <= G_H d,
      // the vertical leg at most G_t |s| <= G_t d^2 / 4; large d is covered by 2 sup|u| / d.
      const Box& s = u.support;
      const double xmax = std::max(std::abs(s.lo[0]), std::abs(s.hi[0]));
      const double ymax = std::max(std::abs(s.lo[1]), std::abs(s.hi[1]));
      const double gt = b.partial[2];
      const double gh = std::hypot(b.partial[0] + 0.5 * ymax * gt, b.partial[1] + 0.5 * xmax * gt);
      if (gt == 0.0 || b.sup == 0.0) return c * gh;
      const double d = (-gh + std::sqrt(gh * gh + 2.0 * gt * b.sup)) / (0.5 * gt);
      return c * std::max(gh, 2.0 * b.sup / d);
    }
    default:
      return c * b.partial.norm();
  }
}

}  // namespace bvy
