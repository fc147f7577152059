#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "bvy/errors.hpp"
#include "bvy/estimator.hpp"
#include "bvy/lipcalc.hpp"
#include "bvy/parallel.hpp"

namespace bvy {
namespace {

constexpr std::size_t kShellChunk = 1 << 16;
constexpr std::size_t kOuterChunk = 1024;
constexpr int kAngles = 256;

double abs_pow(double v, double p) {
  v = std::abs(v);
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

void require_tangent(const SpaceInstance& space) {
  if (!space.supports_dilation())
    throw CapabilityError(std::string(to_string(space.kind())) + " has no tangent cone with a shell measure");
}

// Inner integral F(g) = ∫ |<g, θ>|^p dm⁺(θ) as a function of the (horizontal)
// gradient. F is p-homogeneous, so it is tabulated over directions once.
class DirectionTable {
 public:
  DirectionTable(const SpaceInstance& space, const ShellQuadrature& quad, double p) : quad_(quad), p_(p) {
    dim_ = space.kind() == SpaceKind::Heisenberg1 ? 2 : space.topo_dim();
    if (dim_ == 1) {
      for (double s : {-1.0, 1.0}) table_.push_back(raw(make_point({s})));
    } else if (dim_ == 2) {
      table_ = map_chunks<double>(kAngles, [&](std::size_t k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / kAngles;
        return raw(make_point({std::cos(phi), std::sin(phi)}));
      });
    }
  }

  double operator()(const Point& g) const {
    const double n = g.norm();
    if (n == 0.0) return 0.0;
    if (dim_ == 1) return abs_pow(n, p_) * table_[g[0] > 0.0 ? 1 : 0];
    if (dim_ == 2) {
      double phi = std::atan2(g[1], g[0]);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      const double pos = phi / (2.0 * std::numbers::pi) * kAngles;
      const int k = static_cast<int>(std::floor(pos)) % kAngles;
      const double t = pos - std::floor(pos);
      const double v = (1.0 - t) * table_[k] + t * table_[(k + 1) % kAngles];
      return abs_pow(n, p_) * v;
    }
    return raw(g);
  }

 private:
  double raw(const Point& g) const {
    double s = 0.0;
    const auto& dirs = quad_.directions;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < dim_; ++j) dot += g[j] * dirs[i][j];
      s += quad_.weights[i] * abs_pow(dot, p_);
    }
    return s;
  }

  const ShellQuadrature& quad_;
  double p_;
  int dim_ = 0;
  std::vector<double> table_;
};

}  // namespace

double ShellQuadrature::operator()(const std::function<double(const Point&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < directions.size(); ++i) s += weights[i] * f(directions[i]);
  return s;
}

ShellQuadrature make_shell_quadrature(const SpaceInstance& space, double eps, std::size_t n, std::uint64_t seed) {
  require_tangent(space);
  if (!(eps > 0.0 && eps <= 0.05)) throw PreconditionError("shell eps must lie in (0, 0.05]");
  if (n == 0) throw PreconditionError("shell quadrature needs samples");
  const Point origin = Point::Zero(space.topo_dim());
  const double outer = 1.0 + eps;
  const double mid = 1.0 + 0.5 * eps;
  const double unit = space.reference_ball_volume(outer) / static_cast<double>(n);
  auto parts = map_chunks<ShellQuadrature>(chunk_count(n, kShellChunk), [&](std::size_t c) {
    Stream rng(seed, StreamTag::Shell, c);
    const std::size_t count = std::min(kShellChunk, n - c * kShellChunk);
    ShellQuadrature q;
    for (std::size_t i = 0; i < count; ++i) {
      const Point w = space.draw_ball_proposal(origin, outer, rng);
      const double g = space.gauge(w);
      if (g < 1.0 || g >= outer) continue;
      q.directions.push_back(space.scale(w, 1.0 / g));
      q.weights.push_back((g < mid ? 3.0 : -1.0) * unit / eps);
    }
    return q;
  });
  ShellQuadrature out;
  for (auto& q : parts) {
    out.directions.insert(out.directions.end(), q.directions.begin(), q.directions.end());
    out.weights.insert(out.weights.end(), q.weights.begin(), q.weights.end());
  }
  return out;
}

double shell_integral(const SpaceInstance& space, const std::function<double(const Point&)>& f, double eps,
                      std::size_t n, std::uint64_t seed) {
  return make_shell_quadrature(space, eps, n, seed)(f);
}

MCEstimate K_norm(const SpaceInstance& space, const TestFunction& u, double p, const BVYConfig& cfg) {
  require_tangent(space);
  if (!(p >= 1.0)) throw PreconditionError("p must be at least 1");
  const ShellQuadrature quad = make_shell_quadrature(space, cfg.shell_eps, cfg.n_shell, cfg.seed);
  const DirectionTable inner(space, quad, p);
  const double N = space.hom_dim();
  struct Acc {
    double sum = 0.0, sum_sq = 0.0;
  };
  const std::size_t n = cfg.n_grad;
  auto parts = map_chunks<Acc>(chunk_count(n, kOuterChunk), [&](std::size_t c) {
    Stream rng(cfg.seed, StreamTag::KNorm, c);
    const std::size_t count = std::min(kOuterChunk, n - c * kOuterChunk);
    std::map<std::array<double, 3>, double> memo;
    Acc a;
    for (std::size_t i = 0; i < count; ++i) {
      const Point x = space.draw_window(rng);
      const Point g = blowup(space, u, x).gradient();
      std::array<double, 3> key{0.0, 0.0, 0.0};
      for (int j = 0; j < g.size(); ++j) key[j] = g[j];
      double v;
      if (auto it = memo.find(key); it != memo.end()) {
        v = it->second;
      } else {
        v = inner(g) / N;
        if (memo.size() < 64) memo.emplace(key, v);
      }
      a.sum += v;
      a.sum_sq += v * v;
    }
    return a;
  });
  Acc total;
  for (const auto& a : parts) {
    total.sum += a.sum;
    total.sum_sq += a.sum_sq;
  }
  const double nn = static_cast<double>(n);
  const double mean = total.sum / nn;
  const double var = n > 1 ? std::max(0.0, (total.sum_sq - nn * mean * mean) / (nn - 1.0)) : 0.0;
  const double mw = space.window_mass();
  return {mw * mean, mw * std::sqrt(var / nn), n, cfg.seed};
}

}  // namespace bvy
