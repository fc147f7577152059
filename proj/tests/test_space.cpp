#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bvy/errors.hpp"
#include "bvy/parallel.hpp"
#include "bvy/space.hpp"
#include "oracles.hpp"

using namespace bvy;

namespace {

Box unit_box(int n) {
  Point lo = Point::Zero(n), hi = Point::Ones(n);
  return {lo, hi};
}

Box sym_box(int n, double s) {
  Point lo = Point::Constant(n, -s), hi = Point::Constant(n, s);
  return {lo, hi};
}

std::vector<SpaceInstance> catalogue_spaces() {
  return {SpaceInstance::euclidean_box(unit_box(1)),       SpaceInstance::euclidean_box(unit_box(2)),
          SpaceInstance::euclidean_box(unit_box(3)),       SpaceInstance::weighted_euclidean(unit_box(2)),
          SpaceInstance::banach_box(unit_box(2), 1.0),     SpaceInstance::banach_box(unit_box(2), 3.0),
          SpaceInstance::banach_box(unit_box(2), INFINITY), SpaceInstance::heisenberg(sym_box(3, 1.0)),
          SpaceInstance::fat_cantor()};
}

}  // namespace

TEST_CASE("distance examples") {
  const auto e2 = SpaceInstance::euclidean_box(sym_box(2, 5.0));
  const auto linf = SpaceInstance::banach_box(sym_box(2, 5.0), INFINITY);
  const auto h = SpaceInstance::heisenberg(sym_box(3, 5.0));
  CHECK(distance(e2, make_point_ref(e2, make_point({0, 0})), make_point_ref(e2, make_point({3, 4}))) == 5.0);
  CHECK(distance(linf, make_point_ref(linf, make_point({0, 0})), make_point_ref(linf, make_point({3, 4}))) == 4.0);
  CHECK(distance(h, make_point_ref(h, make_point({0, 0, 0})), make_point_ref(h, make_point({0, 0, 1}))) ==
        doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("points of another space are rejected") {
  const auto a = SpaceInstance::euclidean_box(unit_box(2));
  const auto b = SpaceInstance::euclidean_box(sym_box(2, 1.0));
  const auto x = make_point_ref(a, make_point({0.5, 0.5}));
  const auto y = make_point_ref(b, make_point({0.5, 0.5}));
  CHECK_THROWS_AS(distance(a, x, y), DomainError);
  CHECK_THROWS_AS(make_point_ref(a, make_point({1.5, 0.5})), DomainError);
}

TEST_CASE("dilation examples") {
  const auto e2 = SpaceInstance::euclidean_box(sym_box(2, 5.0));
  const auto h = SpaceInstance::heisenberg(sym_box(3, 5.0));
  auto d = dilate(e2, make_point_ref(e2, make_point({0, 0})), make_point_ref(e2, make_point({1, 1})), 2.0);
  CHECK(d.coords == make_point({2, 2}));
  const auto e = make_point_ref(h, make_point({0, 0, 0}));
  d = dilate(h, e, make_point_ref(h, make_point({0, 0, 1})), 2.0);
  CHECK(d.coords == make_point({0, 0, 4}));
  CHECK(distance(h, e, d) == doctest::Approx(4.0).epsilon(1e-15));
  const auto x = make_point_ref(h, make_point({0.3, -0.2, 0.1}));
  CHECK(dilate(h, make_point_ref(h, make_point({0.1, 0.1, 0.1})), x, 1.0).coords.isApprox(x.coords, 1e-15));
  const auto cantor = SpaceInstance::fat_cantor();
  const auto c0 = make_point_ref(cantor, make_point({0.0}));
  CHECK_THROWS_AS(dilate(cantor, c0, c0, 2.0), CapabilityError);
}

TEST_CASE("metric axioms on random triples") {
  for (const auto& space : catalogue_spaces()) {
    CAPTURE(to_string(space.kind()));
    Stream rng(5, StreamTag::Window, 0);
    for (int i = 0; i < 10000; ++i) {
      const Point x = space.draw_window(rng), y = space.draw_window(rng), z = space.draw_window(rng);
      const double dxy = space.dist(x, y);
      REQUIRE(dxy == space.dist(y, x));
      REQUIRE(dxy > 0.0);
      REQUIRE(space.dist(x, x) == 0.0);
      // Tolerance of a few ulps for rounding in the gauge itself.
      REQUIRE(dxy <= (space.dist(x, z) + space.dist(z, y)) * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("homogeneity under dilation") {
  for (const auto& space : {SpaceInstance::euclidean_box(sym_box(2, 4.0)), SpaceInstance::banach_box(sym_box(3, 4.0), 1.5),
                            SpaceInstance::heisenberg(sym_box(3, 4.0))}) {
    Stream rng(8, StreamTag::Window, 1);
    for (int i = 0; i < 1000; ++i) {
      const Point b = space.draw_window(rng) / 8.0;
      const Point x = space.draw_window(rng) / 8.0;
      const double s = rng.uniform(0.2, 2.0);
      const auto base = make_point_ref(space, b);
      const auto img = dilate(space, base, make_point_ref(space, x), s);
      REQUIRE(space.dist(b, img.coords) == doctest::Approx(s * space.dist(b, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Heisenberg group law") {
  const Point a = make_point({0.3, -0.7, 0.2}), b = make_point({-1.1, 0.4, 0.9});
  const Point ab = heisenberg::mul(a, b);
  CHECK(ab[2] == doctest::Approx(0.2 + 0.9 + 0.5 * (0.3 * 0.4 - (-0.7) * (-1.1))));
  CHECK(heisenberg::mul(a, heisenberg::inv(a)).norm() == 0.0);
  CHECK(heisenberg::unit_ball_volume() == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0));
}

TEST_CASE("unit Korányi ball volume by Monte Carlo") {
  const auto h = SpaceInstance::heisenberg(sym_box(3, 3.0));
  const Point e = Point::Zero(3);
  const MassValue m = ball_measure_mc(h, e, 1.0, {400000, 3});
  CHECK_FALSE(m.exact);
  CHECK(std::abs(m.value - heisenberg::unit_ball_volume()) <= 4.0 * m.std_error);
}

TEST_CASE("Heisenberg volume law r^4") {
  const auto h = SpaceInstance::heisenberg(sym_box(3, 10.0));
  const Point e = Point::Zero(3);
  const MassValue one = ball_measure_mc(h, e, 1.0, {200000, 4});
  for (double r : {0.5, 2.0}) {
    const MassValue m = ball_measure_mc(h, e, r, {200000, 5});
    const double ratio = m.value / one.value;
    const double se = ratio * std::hypot(m.std_error / m.value, one.std_error / one.value);
    CHECK(std::abs(ratio - std::pow(r, 4)) <= 3.0 * se);
  }
}

TEST_CASE("closed-form ball masses agree with Monte Carlo") {
  struct Case {
    SpaceInstance space;
    Point c;
    double r;
  };
  std::vector<Case> cases{
      {SpaceInstance::euclidean_box(unit_box(2)), make_point({0.5, 0.5}), 0.3},
      {SpaceInstance::euclidean_box(unit_box(3)), make_point({0.5, 0.4, 0.5}), 0.3},
      {SpaceInstance::banach_box(unit_box(2), 1.0), make_point({0.5, 0.5}), 0.3},
      {SpaceInstance::banach_box(unit_box(2), 3.0), make_point({0.5, 0.5}), 0.3},
      {SpaceInstance::weighted_euclidean(unit_box(1)), make_point({0.1}), 0.3},
      {SpaceInstance::weighted_euclidean(unit_box(2)), make_point({0.3, 0.5}), 0.2},
      {SpaceInstance::weighted_euclidean(unit_box(3)), make_point({0.7, 0.5, 0.5}), 0.25},
      {SpaceInstance::fat_cantor(), make_point({0.3}), 0.05},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.space.kind()));
    const MassValue exact = ball_measure(c.space, c.c, c.r);
    REQUIRE(exact.exact);
    const MassValue mc = ball_measure_mc(c.space, c.c, c.r, {400000, 6});
    CHECK(std::abs(exact.value - mc.value) <= 4.0 * mc.std_error);
  }
}

TEST_CASE("lq unit ball volumes") {
  CHECK(lq_unit_ball_volume(2, 2.0) == doctest::Approx(std::numbers::pi));
  CHECK(lq_unit_ball_volume(3, 2.0) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(lq_unit_ball_volume(2, 1.0) == doctest::Approx(2.0));
  CHECK(lq_unit_ball_volume(3, INFINITY) == 8.0);
  CHECK(dual_exponent(1.0) == INFINITY);
  CHECK(dual_exponent(INFINITY) == 1.0);
  CHECK(dual_exponent(3.0) == doctest::Approx(1.5));
}

TEST_CASE("windowed disk mass matches the disk-box oracle") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  const MassValue mc = ball_measure(e2, make_point({0.1, 0.05}), 0.3, {400000, 7});
  CHECK_FALSE(mc.exact);
  CHECK(std::abs(mc.value - oracle::disk_box_area(0.1, 0.05, 0.3)) <= 4.0 * mc.std_error);
}

TEST_CASE("doubling on the convex Euclidean window") {
  const auto e2 = SpaceInstance::euclidean_box(unit_box(2));
  Stream rng(12, StreamTag::Window, 0);
  for (int i = 0; i < 1000; ++i) {
    const Point x = e2.draw_window(rng);
    const double r = std::exp(rng.uniform(std::log(0.01), std::log(0.5)));
    const double inner = oracle::disk_box_area(x[0], x[1], r, 4000);
    const double outer = oracle::disk_box_area(x[0], x[1], 2.0 * r, 4000);
    REQUIRE(outer <= 4.0 * inner * (1.0 + 1e-6));
  }
}

TEST_CASE("window sampling is deterministic and independent of worker count") {
  for (const auto& space : catalogue_spaces()) {
    set_worker_count(1);
    const auto a = sample_window(space, 77, 20000);
    set_worker_count(4);
    const auto b = sample_window(space, 77, 20000);
    set_worker_count(16);
    const auto c = sample_window(space, 77, 20000);
    set_worker_count(0);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      REQUIRE(a.points[i].coords == b.points[i].coords);
      REQUIRE(a.points[i].coords == c.points[i].coords);
      REQUIRE(space.window().contains(a.points[i].coords));
      REQUIRE(space.in_support(a.points[i].coords));
    }
    CHECK(a.mass.exact);
  }
}

TEST_CASE("window sampling follows the weight") {
  const auto w = SpaceInstance::weighted_euclidean(unit_box(1));
  const auto s = sample_window(w, 3, 200000);
  CHECK(s.mass.value == doctest::Approx(1.0));
  // P(x < 1/2) = ∫_0^{1/2} (1 + sin 2πx/2) dx = 1/2 + 1/(2π)
  double below = 0;
  for (const auto& p : s.points) below += p.coords[0] < 0.5;
  const double f = below / 200000.0, target = 0.5 + 0.5 / std::numbers::pi;
  CHECK(std::abs(f - target) <= 4.0 * std::sqrt(target * (1 - target) / 200000.0));
}

TEST_CASE("ball sampling stays in the ball and the window") {
  const auto h = SpaceInstance::heisenberg(sym_box(3, 1.0));
  const auto c = make_point_ref(h, make_point({0.9, 0.0, 0.0}));
  const auto s = sample_ball(h, c, 0.3, 9, 5000);
  REQUIRE(s.points.size() == 5000);
  for (const auto& p : s.points) {
    REQUIRE(h.dist(c.coords, p.coords) <= 0.3);
    REQUIRE(h.window().contains(p.coords));
  }
  CHECK_FALSE(s.mass.exact);
  const auto e = make_point_ref(h, make_point({0.0, 0.0, 0.0}));
  const auto inside = sample_ball(h, e, 0.3, 9, 10);
  CHECK(inside.mass.exact);
  CHECK(inside.mass.value == doctest::Approx(heisenberg::unit_ball_volume() * std::pow(0.3, 4)));
  CHECK_THROWS_AS(sample_ball(h, e, 0.0, 9, 10), PreconditionError);
  const auto cantor = SpaceInstance::fat_cantor();
  CHECK_THROWS_AS(sample_ball(cantor, make_point_ref(cantor, make_point({0.0})), 0.1, 1, 10), CapabilityError);
}

TEST_CASE("fat Cantor bookkeeping") {
  const auto c = SpaceInstance::fat_cantor(0.25, 12);
  const auto& spec = c.cantor();
  CHECK(spec.intervals.size() == 4096u);
  double total = 1.0;
  for (int k = 1; k <= 12; ++k) total *= 1.0 - std::pow(0.25, k);
  CHECK(spec.total_length == doctest::Approx(total).epsilon(1e-12));
  CHECK(c.window_mass() == doctest::Approx(total).epsilon(1e-12));
  CHECK(c.interval_mass(0.0, 1.0) == doctest::Approx(total).epsilon(1e-12));
  CHECK(c.interval_mass(0.0, 0.5) == doctest::Approx(total / 2.0).epsilon(1e-12));
  CHECK(c.in_support(make_point({0.0})));
  CHECK_FALSE(c.in_support(make_point({0.5})));
  CHECK_THROWS_AS(SpaceInstance::fat_cantor(1.5, 3), ConfigError);
}
