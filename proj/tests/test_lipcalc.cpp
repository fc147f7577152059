#include <doctest.h>

#include <cmath>

#include "bvy/errors.hpp"
#include "bvy/lipcalc.hpp"

using namespace bvy;

namespace {

Box unit_box(int n) { return {Point::Zero(n), Point::Ones(n)}; }
Box sym_box(int n, double s) { return {Point::Constant(n, -s), Point::Constant(n, s)}; }

struct Pair {
  SpaceInstance space;
  TestFunction u;
};

std::vector<Pair> smooth_catalogue() {
  const auto e1 = SpaceInstance::euclidean_box(unit_box(1));
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const auto w2 = SpaceInstance::weighted_euclidean(unit_box(2));
  const auto b1 = SpaceInstance::banach_box(unit_box(2), 1.0);
  const auto binf = SpaceInstance::banach_box(unit_box(2), INFINITY);
  const auto h = SpaceInstance::heisenberg(sym_box(3, 1.0));
  const Point c2 = make_point({0.5, 0.5}), hw2 = make_point({0.3, 0.3});
  const Box sine_box{make_point({0.2, 0.2}), make_point({0.8, 0.8})};
  return {
      {e1, make_smooth_bump(e1, 1.0, make_point({0.5}), make_point({0.3}))},
      {e2, make_smooth_bump(e2, 1.0, c2, hw2)},
      {e2, make_product_sine(e2, 0.7, 2, sine_box)},
      {w2, make_smooth_bump(w2, 1.0, c2, hw2)},
      {b1, make_smooth_bump(b1, 1.0, c2, hw2)},
      {binf, make_product_sine(binf, 0.5, 1, sine_box)},
      {h, make_heis_coord(h, make_point({0, 0, 0}), make_point({0.2, 0.2, 0.2}), make_point({0.7, 0.7, 0.7}))},
  };
}

}  // namespace

TEST_CASE("eval examples") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const auto lin = make_linear(e2);
  CHECK(eval(e2, lin, make_point({0.3, 0.7})) == doctest::Approx(0.3));
  const auto cone = make_cone(e2, 0.2, make_point({0.5, 0.5}));
  CHECK(eval(e2, cone, make_point({0.5, 0.5})) == doctest::Approx(0.2));
  CHECK(eval(e2, cone, make_point({0.9, 0.9})) == 0.0);
  const auto bump = make_smooth_bump(e2, 1.0, make_point({0.5, 0.5}), make_point({0.1, 0.1}));
  CHECK(eval(e2, bump, make_point({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(eval(e2, bump, make_point({0.05, 0.5})) == 0.0);
  CHECK(eval(e2, bump.scaled(-3.0), make_point({0.5, 0.5})) == doctest::Approx(-3.0));
}

TEST_CASE("inconsistent parameters are rejected") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  CHECK_THROWS_AS(make_smooth_bump(e2, 1.0, make_point({0.5, 0.5}), make_point({0.7, 0.3})), ConfigError);
  CHECK_THROWS_AS(make_smooth_bump(e2, 1.0, make_point({0.5}), make_point({0.3})), ConfigError);
  CHECK_THROWS_AS(make_product_sine(e2, 1.0, 1.5, e2.window()), ConfigError);
  CHECK_THROWS_AS(make_cone(e2, -1.0, make_point({0.5, 0.5})), ConfigError);
}

TEST_CASE("analytic gradients match central differences") {
  for (const auto& [space, u] : smooth_catalogue()) {
    CAPTURE(to_string(space.kind()));
    CAPTURE(to_string(u.formula));
    Stream rng(3, StreamTag::Window, 0);
    for (int i = 0; i < 200; ++i) {
      const Point x = space.draw_window(rng);
      const auto g = coordinate_gradient(space, u, x);
      REQUIRE(g);
      for (int k = 0; k < x.size(); ++k) {
        const double h = 1e-6;
        Point xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const double fd = (eval(space, u, xp) - eval(space, u, xm)) / (2 * h);
        REQUIRE((*g)[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("global Lipschitz bound dominates sampled quotients") {
  for (const auto& [space, u] : smooth_catalogue()) {
    CAPTURE(to_string(space.kind()));
    const double L = global_lip(space, u);
    REQUIRE(L > 0.0);
    Stream rng(4, StreamTag::GlobalLip, 0);
    for (int i = 0; i < 10000; ++i) {
      const Point x = space.draw_window(rng);
      Point y = i % 2 ? space.draw_window(rng) : space.draw_ball_proposal(x, 0.05, rng);
      if (!space.window().contains(y)) y = x;
      const double d = space.dist(x, y);
      if (d == 0.0) continue;
      REQUIRE(std::abs(eval(space, u, x) - eval(space, u, y)) <= L * d * (1 + 1e-12));
    }
  }
}

TEST_CASE("global_lip examples") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  CHECK(global_lip(e2, make_linear(e2)) == 1.0);
  CHECK(global_lip(e2, make_linear(e2).scaled(0.0)) == 0.0);
  const auto cone = make_cone(e2, 0.3, make_point({0.5, 0.5})).without_analytic();
  const double est = global_lip(e2, cone);
  CHECK(est >= 0.95);
  CHECK(est <= 1.10);
}

TEST_CASE("lip ladder examples") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const auto u = make_product_sine(e2, 0.7, 2, Box{make_point({0.2, 0.2}), make_point({0.8, 0.8})});
  const Point x = make_point({0.37, 0.44});
  const double g = gradient_norm(e2, *metric_gradient(e2, u, x));
  const LipLadder lad = lip_ladder(e2, u, x, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, 512, 1);
  CHECK(lad.l_vals.back() == doctest::Approx(g).epsilon(0.02));
  CHECK(lad.L_vals.back() == doctest::Approx(g).epsilon(0.02));

  const auto e1 = SpaceInstance::euclidean_box(unit_box(1));
  const auto cone = make_cone(e1, 0.3, make_point({0.5}));
  const LipLadder apex = lip_ladder(e1, cone, make_point({0.5}), {1e-1, 1e-2, 1e-3}, 512, 2);
  for (std::size_t i = 0; i < apex.radii.size(); ++i) {
    CHECK(apex.l_vals[i] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(apex.L_vals[i] == doctest::Approx(1.0).epsilon(0.05));
  }
  const LipLadder flat = lip_ladder(e2, make_linear(e2).scaled(0.0), x, {1e-1, 1e-2}, 64, 3);
  CHECK(flat.l_vals == std::vector<double>{0.0, 0.0});
  CHECK(flat.L_vals == std::vector<double>{0.0, 0.0});

  CHECK_THROWS_AS(lip_ladder(e2, u, x, {1e-2, 1e-1}, 64, 3), PreconditionError);
  CHECK_THROWS_AS(lip_ladder(e2, u, x, {1e-1}, 8, 3), PreconditionError);
}

TEST_CASE("ladder monotonicity and lip <= Lip for the whole catalogue") {
  for (const auto& [space, u] : smooth_catalogue()) {
    CAPTURE(to_string(space.kind()));
    Stream rng(6, StreamTag::Window, 0);
    for (int i = 0; i < 100; ++i) {
      const Point x = space.draw_window(rng);
      const LipLadder lad = lip_ladder(space, u, x, {1e-1, 1e-2, 1e-3}, 64, 100 + i, 4);
      for (std::size_t k = 0; k < lad.radii.size(); ++k) {
        REQUIRE(lad.l_vals[k] <= lad.L_vals[k]);
        if (k > 0) {
          REQUIRE(lad.L_vals[k] <= lad.L_vals[k - 1]);
          REQUIRE(lad.l_vals[k] >= lad.l_vals[k - 1]);
        }
      }
    }
  }
}

TEST_CASE("estimated lip and Lip agree on smooth functions") {
  LipConfig cfg;
  cfg.prefer_analytic = false;
  for (const auto& [space, u] : smooth_catalogue()) {
    CAPTURE(to_string(space.kind()));
    CAPTURE(to_string(u.formula));
    const double L = global_lip(space, u);
    Stream rng(10, StreamTag::Window, 0);
    int checked = 0;
    while (checked < 5) {
      const Point x = space.draw_window(rng);
      if (!u.support.contains(x) || !space.ball_inside_window(x, 0.1)) continue;
      const double g = gradient_norm(space, *metric_gradient(space, u, x));
      if (g < 0.2 * L) continue;
      ++checked;
      const PointwiseLip est = pointwise_lipschitz(space, u, x, cfg);
      CHECK_FALSE(est.analytic);
      CHECK(est.lip <= est.Lip);
      CHECK(est.Lip <= L);
      CHECK(est.lip == doctest::Approx(est.Lip).epsilon(0.03));
      CHECK(est.Lip == doctest::Approx(g).epsilon(0.03));
    }
  }
}

TEST_CASE("pointwise_lipschitz examples") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const auto lin = make_linear(e2);
  const PointwiseLip a = pointwise_lipschitz(e2, lin, make_point({0.4, 0.6}));
  CHECK(a.analytic);
  CHECK(a.lip == 1.0);
  CHECK(a.Lip == 1.0);
  const PointwiseLip scaled = pointwise_lipschitz(e2, lin.scaled(-2.5), make_point({0.4, 0.6}));
  CHECK(scaled.Lip == 2.5 * a.Lip);

  const auto h = SpaceInstance::heisenberg(sym_box(3, 1.0));
  const auto hc = make_heis_coord(h, make_point({0, 0, 0}), make_point({0.2, 0.2, 0.2}), make_point({0.7, 0.7, 0.7}));
  LipConfig est;
  est.prefer_analytic = false;
  const Point x = make_point({0.05, -0.03, 0.02});
  const PointwiseLip p = pointwise_lipschitz(h, hc, x, est);
  CHECK(p.lip == doctest::Approx(1.0).epsilon(0.03));
  CHECK(p.Lip == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("blow-ups") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const Blowup lin = blowup(e2, make_linear(e2), make_point({0.5, 0.5}));
  CHECK(lin(make_point({0.3, -0.8})) == doctest::Approx(0.3));

  const auto h = SpaceInstance::heisenberg(sym_box(3, 1.0));
  const auto hc = make_heis_coord(h, make_point({0, 0, 0}), make_point({0.2, 0.2, 0.2}), make_point({0.7, 0.7, 0.7}));
  const Blowup b = blowup(h, hc, make_point({0.1, 0.05, -0.1}));
  CHECK(b(make_point({0.4, -0.2, 0.9})) == doctest::Approx(0.4));

  CHECK_THROWS_AS(blowup(e2, make_linear(e2).without_analytic(), make_point({0.5, 0.5})), CapabilityError);
  const auto w = SpaceInstance::weighted_euclidean(unit_box(2));
  CHECK_THROWS_AS(blowup(w, make_linear(w), make_point({0.5, 0.5})), CapabilityError);

  // Rescaled increments converge to the blow-up, monotonically within noise.
  const auto pairs = smooth_catalogue();
  for (const auto& [space, u] : pairs) {
    if (!space.supports_dilation()) continue;
    CAPTURE(to_string(space.kind()));
    const Point x = u.support.center() + (u.support.hi - u.support.lo) * 0.13;
    double prev = INFINITY;
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double r = blowup_residual(space, u, x, delta, 512, 21);
      CHECK(r <= prev * 1.05 + 1e-12);
      prev = r;
    }
    CHECK(prev < 1e-2);
  }
}
