// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance <configs-dir>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>

#include <fmt/format.h>

#include "bvy/estimator.hpp"
#include "bvy/experiment.hpp"
#include "bvy/lipcalc.hpp"
#include "bvy/parallel.hpp"
#include "oracles.hpp"

using namespace bvy;
namespace fs = std::filesystem;

namespace {

fs::path g_configs;
std::vector<RescaledCurve> g_curves;  // every curve produced, for the monotonicity property

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

ScenarioResult run_config(const std::string& name) {
  const auto cfg = load_config(g_configs / (name + ".json"));
  return run_scenario(cfg);
}

RescaledCurve curve_from(const json& j) {
  RescaledCurve c;
  c.p = j.at("p").get<double>();
  for (const auto& r : j.at("rows")) {
    CurveRow row;
    row.lambda = r.at("lambda").get<double>();
    row.m_hat.value = r.at("M_hat").at("value").get<double>();
    row.m_hat.std_error = r.at("M_hat").at("std_error").get<double>();
    row.rescaled = r.at("rescaled").get<double>();
    c.rows.push_back(row);
  }
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void fail_assertions(Outcome& o, const std::string& name, const ScenarioResult& r) {
  for (const auto& a : r.report.at("assertions"))
    if (!a.at("pass").get<bool>())
      o.require(false, fmt::format("{}: {} ({:.6g} > {:.6g})", name, a.at("name").get<std::string>(),
                                   a.at("left").get<double>(), a.at("right").get<double>()));
}

Outcome golden() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_config("golden_1d");
  const double secs = seconds_since(t0);
  fail_assertions(o, "golden_1d", r);
  const double limit = r.report.at("fit").at("plateau_median").at("limit").get<double>();
  o.require(r.report.at("bvy").at("n_pairs").get<std::size_t>() == 1000000, "n_pairs must be 1e6");
  o.require(std::abs(limit - 2.0) <= 0.04, fmt::format("limit {:.5f} outside 2 +- 2%", limit));
  o.require(secs < 30.0, fmt::format("runtime {:.1f} s", secs));
  g_curves.push_back(curve_from(r.report.at("curve")));
  o.detail = o.pass ? fmt::format("limit {:.4f}, {:.2f} s", limit, secs) : o.detail;
  return o;
}

Outcome bvy_euclidean() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_config("bvy_euclidean_2d");
  const double secs = seconds_since(t0);
  fail_assertions(o, "bvy_euclidean_2d", r);
  const auto& rows = r.report.at("curve").at("rows");
  for (const auto& row : rows) {
    o.require(row.at("estimator") == "localized", "estimator must be localized");
    const double l = row.at("lambda").get<double>();
    o.require(l >= 100.0 * (1 - 1e-12) && l <= 1e4 * (1 + 1e-12), "lambda outside [1e2, 1e4]");
  }
  const double limit = r.report.at("fit").at("plateau_median").at("limit").get<double>();
  const double ref = r.report.at("limit_reference").get<double>();
  o.require(std::abs(r.report.at("k_const").get<double>() - std::numbers::pi) < 1e-12, "k_const(2,2) != pi");
  o.require(std::abs(limit - ref) <= 0.05 * ref, "limit outside 5%");
  o.require(secs < 300.0, fmt::format("runtime {:.1f} s", secs));
  g_curves.push_back(curve_from(r.report.at("curve")));
  if (o.pass) o.detail = fmt::format("limit {:.4f} vs (pi/2)|grad u|^2 = {:.4f}, {:.2f} s", limit, ref, secs);
  return o;
}

Outcome k_identity() {
  Outcome o;
  double worst = 0.0;
  for (int N : {1, 2, 3})
    for (double p : {1.0, 2.0, 3.0}) {
      const double k = k_const(p, N), mc = oracle::k_const_mc(p, N, 4000000, 17);
      worst = std::max(worst, std::abs(k - mc) / mc);
      o.require(std::abs(k - mc) <= 0.005 * mc, fmt::format("(p={}, N={}): {:.6f} vs MC {:.6f}", p, N, k, mc));
      if (N == 1) o.require(k == 2.0, fmt::format("k({}, 1) = {:.17g} != 2", p, k));
    }
  o.require(k_const(2.0, 2) == std::numbers::pi, "k(2,2) != pi");
  if (o.pass) o.detail = fmt::format("max relative deviation from sphere MC {:.2e}", worst);
  return o;
}

Outcome sandwich() {
  Outcome o;
  int passed = 0;
  for (const char* name : {"bounds_euclidean_1d", "bounds_euclidean_2d", "bounds_weighted", "bounds_banach_l1",
                           "bounds_banach_linf", "bounds_heisenberg"}) {
    const auto r = run_config(name);
    fail_assertions(o, name, r);
    passed += r.pass;
    g_curves.push_back(curve_from(r.report.at("bounds").at("curve")));
  }
  if (o.pass) o.detail = fmt::format("{}/6 sandwiches hold", passed);
  return o;
}

Outcome slope_law() {
  Outcome o;
  std::string summary;
  for (const char* name : {"optimality_1d", "optimality_2d"}) {
    const auto r = run_config(name);
    fail_assertions(o, name, r);
    const double N = space_from_json(r.report.at("space")).hom_dim();
    for (const auto& run : r.report.at("runs")) {
      const double nbar = run.at("bvy").at("N_bar").get<double>();
      const double slope = run.at("fit").at("loglog_ls").at("slope").get<double>();
      const double expected = run.at("expected_slope").get<double>();
      o.require(std::abs(slope - expected) <= 0.1, fmt::format("(N={}, N_bar={}) slope {:.4f}", N, nbar, slope));
      if (nbar > N) o.require(slope > 0.0, "divergent case misclassified");
      if (nbar < N) o.require(slope < 0.0, "decaying case misclassified");
      summary += fmt::format("{}(N={},Nbar={}): {:.3f} vs {:.1f}", summary.empty() ? "" : ", ", N, nbar, slope, expected);
      g_curves.push_back(curve_from(run.at("curve")));
    }
  }
  if (o.pass) o.detail = summary;
  return o;
}

Outcome asymptotic(const char* name, double limit_tol, std::optional<double> closed) {
  Outcome o;
  const auto r = run_config(name);
  fail_assertions(o, name, r);
  const double limit = r.report.at("fit").at("plateau_median").at("limit").get<double>();
  const double K = r.report.at("K_norm").at("value").get<double>();
  o.require(std::abs(limit - K) <= limit_tol * K, fmt::format("limit {:.5f} vs K {:.5f}", limit, K));
  if (closed) o.require(std::abs(K - *closed) <= 0.02 * *closed, fmt::format("K {:.5f} vs {:.5f}", K, *closed));
  g_curves.push_back(curve_from(r.report.at("curve")));
  if (o.pass) o.detail = fmt::format("limit {:.4f}, K_norm {:.4f}", limit, K);
  return o;
}

Outcome diagnostics() {
  Outcome o;
  std::string summary;
  const std::vector<std::pair<const char*, double>> dims{{"diagnose_euclidean_1d", 1.0}, {"diagnose_euclidean_2d", 2.0},
                                                         {"diagnose_euclidean_3d", 3.0}, {"diagnose_heisenberg", 4.0},
                                                         {"diagnose_weighted", 0.0},     {"diagnose_banach_l1", 0.0},
                                                         {"diagnose_fat_cantor", 0.0}};
  for (const auto& [name, N] : dims) {
    const auto r = run_config(name);
    fail_assertions(o, name, r);
    const double dim = r.report.at("doubling").at("dimension_hat").get<double>();
    if (N > 0.0) {
      const double tol = N == 4.0 ? 0.1 : 0.05;
      o.require(std::abs(dim - N) <= tol, fmt::format("{}: dimension {:.4f}", name, dim));
      summary += fmt::format("{}{:.3f}", summary.empty() ? "dims " : "/", dim);
    }
    const auto& vol = r.report.at("volume_lower");
    o.require(vol.at("n_trials").get<std::size_t>() >= 10000, "fewer than 1e4 tuples");
    o.require(vol.at("violations").get<std::size_t>() == 0, fmt::format("{}: volume lower bound violated", name));
  }
  if (o.pass) o.detail = summary + ", no volume-bound violations on 7 spaces";
  return o;
}

Outcome properties() {
  Outcome o;
  const Box u2{Point::Zero(2), Point::Ones(2)};
  const auto e2 = SpaceInstance::euclidean_box(u2);
  const auto bump = make_smooth_bump(e2, 1.0, make_point({0.5, 0.5}), make_point({0.3, 0.3}));

  for (const auto& c : g_curves) o.require(monotone_within(c), "M_hat increases beyond 3 joint stderr");

  BVYConfig cfg;
  cfg.N_bar = 2.0;
  cfg.n_pairs = 1000000;
  for (double c : {2.0, 10.0})
    o.require(pair_measure_direct(e2, bump.scaled(c), cfg, 50.0).value == pair_measure_direct(e2, bump, cfg, 50.0 / c).value,
              fmt::format("scaling identity broken for c={}", c));

  const auto h = SpaceInstance::heisenberg(Box{Point::Constant(3, -1.0), Point::Constant(3, 1.0)});
  const auto hc = make_heis_coord(h, make_point({0, 0, 0}), make_point({0.2, 0.2, 0.2}), make_point({0.7, 0.7, 0.7}));
  const auto binf = SpaceInstance::banach_box(u2, INFINITY);
  struct Case {
    SpaceInstance space;
    TestFunction u;
    double lambda;
    std::size_t n_pairs;
  };
  for (const auto& c : {Case{e2, bump, 100.0, 4000000}, Case{binf, make_cone(binf, 0.3, make_point({0.5, 0.5})), 100.0, 4000000},
                        Case{h, hc, 70.0, 30000000}}) {
    BVYConfig bc;
    bc.N_bar = c.space.hom_dim();
    bc.n_pairs = c.n_pairs;
    bc.n_outer = 40000;
    const MCEstimate d = pair_measure_direct(c.space, c.u, bc, c.lambda);
    const MCEstimate l = pair_measure_localized(c.space, c.u, bc, c.lambda);
    o.require(std::abs(d.value - l.value) <= 3.0 * std::hypot(d.std_error, l.std_error),
              fmt::format("{}: direct {:.4g} vs localized {:.4g}", to_string(c.space.kind()), d.value, l.value));
  }

  Stream rng(31, StreamTag::Window, 0);
  for (const auto& [space, u] : {std::pair{e2, bump}, std::pair{h, hc}})
    for (int i = 0; i < 50; ++i) {
      const LipLadder lad = lip_ladder(space, u, space.draw_window(rng), {1e-1, 1e-2, 1e-3}, 64, 500 + i, 4);
      for (std::size_t k = 0; k < lad.radii.size(); ++k) {
        o.require(lad.l_vals[k] <= lad.L_vals[k], "lip > Lip on a ladder rung");
        if (k) o.require(lad.L_vals[k] <= lad.L_vals[k - 1] && lad.l_vals[k] >= lad.l_vals[k - 1], "ladder not monotone");
      }
    }

  for (const auto& [space, u] : {std::pair{e2, bump}, std::pair{h, hc}}) {
    const Point x = u.support.center() + (u.support.hi - u.support.lo) * 0.13;
    double prev = INFINITY;
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double res = blowup_residual(space, u, x, delta, 512, 41);
      o.require(res <= prev * 1.05 + 1e-12, "blow-up residual not decreasing");
      prev = res;
    }
  }
  if (o.pass) o.detail = fmt::format("{} curves monotone, scaling exact, estimators agree", g_curves.size());
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const char* name : {"golden_1d", "asymptotic_banach_linf", "diagnose_heisenberg", "bounds_heisenberg"}) {
    std::vector<std::map<std::string, std::string>> outs;
    for (const char* w : {"1", "4", "16"}) {
      setenv("WORKERS", w, 1);
      outs.push_back(run_config(name).files);
    }
    o.require(outs[0] == outs[1] && outs[0] == outs[2], fmt::format("{}: outputs differ across WORKERS", name));
  }
  unsetenv("WORKERS");
  if (o.pass) o.detail = "4 scenarios byte-identical under WORKERS=1/4/16";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? fs::path(argv[1]) : fs::path("configs");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 golden 1-D exactness", golden},
      {"2 Euclidean BVY reproduction", bvy_euclidean},
      {"3 k_{p,N} identity", k_identity},
      {"4 bound sandwich", sandwich},
      {"5 optimality slope law", slope_law},
      {"6 Banach q=inf limit vs K_norm", [] { return asymptotic("asymptotic_banach_linf", 0.05, 3.0); }},
      {"7 Heisenberg limit vs K_norm", [] { return asymptotic("asymptotic_heisenberg", 0.08, std::nullopt); }},
      {"8 diagnostics", diagnostics},
      {"9 property suite", properties},
      {"10 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << fmt::format("{} criterion {}: {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", name, o.detail,
                             seconds_since(t0))
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
  return failures == 0 ? 0 : 1;
}
