#include "bvy/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "bvy/curve_io.hpp"
#include "bvy/errors.hpp"
#include "bvy/plot.hpp"

namespace bvy {
namespace {

constexpr Scenario kScenarios[] = {Scenario::VerifyBvyEuclidean, Scenario::VerifyBounds,
                                   Scenario::VerifyOptimality,   Scenario::VerifyAsymptotic,
                                   Scenario::DiagnoseSpace,      Scenario::Golden1d};

// Collects named inequalities left <= right, with both sides and the margin.
class Verdicts {
 public:
  void le(const std::string& name, double left, double right) {
    const bool ok = left <= right;
    items_.push_back({{"name", name}, {"left", left}, {"relation", "<="}, {"right", right},
                      {"margin", right - left}, {"pass", ok}});
    pass_ = pass_ && ok;
  }
  // |value - ref| <= tol * |ref|
  void within(const std::string& name, double value, double ref, double tol) {
    le(name, std::abs(value - ref), tol * std::abs(ref));
    items_.back()["value"] = value;
    items_.back()["reference"] = ref;
    items_.back()["tolerance"] = tol;
  }
  bool pass() const { return pass_; }
  const json& items() const { return items_; }

 private:
  json items_ = json::array();
  bool pass_ = true;
};

std::string curve_csv(const RescaledCurve& curve) {
  std::ostringstream out;
  write_curve_csv(curve, out);
  return out.str();
}

void add_curve(ScenarioResult& res, const std::string& stem, const RescaledCurve& curve) {
  res.files[stem + ".csv"] = curve_csv(curve);
  res.files[stem + ".svg"] = render_svg(plot_data(curve_records(curve)));
}

std::vector<double> radii_from(const json& diag, const SpaceInstance& space, const char* key,
                               std::vector<double> relative) {
  if (diag.contains(key)) return diag.at(key).get<std::vector<double>>();
  for (double& r : relative) r *= space.window().min_side();
  return relative;
}

double check_or(const json& checks, const char* key, double fallback) { return checks.value(key, fallback); }

DensityReport density_for(const SpaceInstance& space, double N, const ExperimentConfig& cfg) {
  const auto radii = radii_from(cfg.diagnostics, space, "density_radii", {0.1, 0.03, 0.01, 0.003, 0.001});
  return estimate_density_bounds(space, N, cfg.diagnostics.value("n_points", std::size_t{2000}), radii, cfg.seed);
}

// Measure of the strip {|x - y| <= δ} in [a, b]^2, δ = (c / λ)^{p / N_bar}.
double strip_measure(double c, double lambda, double p, double N_bar, double length) {
  const double delta = std::min(length, std::pow(std::abs(c) / lambda, p / N_bar));
  return 2.0 * delta * length - delta * delta;
}

void run_golden(const ExperimentConfig& cfg, const SpaceInstance& space, const TestFunction& u, ScenarioResult& res,
                Verdicts& v) {
  const RescaledCurve curve = rescaled_curve(space, u, cfg.bvy);
  const LimitFit fit = limit_fit(curve);
  const double c = u.scale * u.params.slope;
  const double length = space.window().volume();
  json rungs = json::array();
  for (const auto& row : curve.rows) {
    const double exact = strip_measure(c, row.lambda, cfg.bvy.p, cfg.bvy.N_bar, length);
    rungs.push_back({{"lambda", row.lambda}, {"closed_form", exact}, {"M_hat", row.m_hat.value},
                     {"std_error", row.m_hat.std_error}});
    v.le(fmt::format("rung lambda={:g}: |M_hat - closed form| <= 3 stderr", row.lambda),
         std::abs(row.m_hat.value - exact), 3.0 * row.m_hat.std_error);
  }
  const double target = 2.0 * std::pow(std::abs(c), cfg.bvy.p) * length;
  v.within("limit vs 2 c^p |W|", fit.limit, target, check_or(cfg.checks, "limit_tolerance", 0.02));
  res.report["curve"] = to_json(curve);
  res.report["fit"] = to_json(fit);
  res.report["closed_form"] = rungs;
  res.report["limit_reference"] = target;
  add_curve(res, "curve", curve);
}

void run_bvy_euclidean(const ExperimentConfig& cfg, const SpaceInstance& space, const TestFunction& u,
                       ScenarioResult& res, Verdicts& v) {
  const RescaledCurve curve = rescaled_curve(space, u, cfg.bvy);
  const LimitFit fit = limit_fit(curve);
  const int N = space.topo_dim();
  const double k = k_const(cfg.bvy.p, N);
  const GradNorms norms = grad_norm(space, u, cfg.bvy.p, cfg.bvy);
  const double reference = k / N * norms.lip_p.value;
  v.within("limit vs k_{p,N}/N * grad_norm", fit.limit, reference, check_or(cfg.checks, "limit_tolerance", 0.05));
  res.report["curve"] = to_json(curve);
  res.report["fit"] = to_json(fit);
  res.report["k_const"] = k;
  res.report["grad_norm"] = to_json(norms);
  res.report["limit_reference"] = reference;
  if (cfg.checks.value("k_norm_consistency", false)) {
    const MCEstimate K = K_norm(space, u, cfg.bvy.p, cfg.bvy);
    res.report["K_norm"] = to_json(K);
    v.within("K_norm vs k_{p,N}/N * grad_norm", K.value, reference, check_or(cfg.checks, "k_norm_tolerance", 0.02));
  }
  add_curve(res, "curve", curve);
}

void run_bounds(const ExperimentConfig& cfg, const SpaceInstance& space, const TestFunction& u, ScenarioResult& res,
                Verdicts& v) {
  const DensityReport density = density_for(space, space.hom_dim(), cfg);
  const BoundReport b = bound_check(space, u, cfg.bvy.p, cfg.bvy, density.a_hat, density.b_hat);
  v.le("C1 * int lip^{N+p}/Lip^N <= limit", b.lower, b.fit.limit);
  v.le("limit <= 2 b_hat * int Lip^p", b.fit.limit, b.upper);
  res.report["density"] = to_json(density);
  res.report["bounds"] = to_json(b);
  std::ostringstream traces;
  write_traces_csv(density, traces);
  res.files["traces.csv"] = traces.str();
  add_curve(res, "curve", b.curve);
}

void run_optimality(const ExperimentConfig& cfg, const SpaceInstance& space, const TestFunction& u,
                    ScenarioResult& res, Verdicts& v) {
  if (!cfg.checks.contains("runs") || !cfg.checks.at("runs").is_array() || cfg.checks.at("runs").empty())
    throw ConfigError("verify-optimality needs checks.runs, a list of {\"N_bar\", ...} overrides");
  const double N = space.hom_dim();
  const double tol = check_or(cfg.checks, "slope_tolerance", 0.1);
  json runs = json::array();
  for (const json& run : cfg.checks.at("runs")) {
    BVYConfig bc = bvy_config_from_json(run, cfg.bvy);
    bc.seed = cfg.seed;
    validate(bc);
    const RescaledCurve curve = rescaled_curve(space, u, bc);
    const LimitFit fit = limit_fit(curve);
    const double expected = bc.p * (1.0 - N / bc.N_bar);
    const std::string tag = fmt::format("N_bar={:g}", bc.N_bar);
    v.le(tag + ": |slope - p(1 - N/N_bar)| <= tol", std::abs(fit.slope - expected), tol);
    if (bc.N_bar > N) v.le(tag + ": slope > 0 (divergence to infinity)", 0.0, fit.slope);
    if (bc.N_bar < N) v.le(tag + ": slope < 0 (decay to zero)", fit.slope, 0.0);
    if (!std::isfinite(fit.slope)) v.le(tag + ": slope is defined", 1.0, 0.0);
    runs.push_back({{"bvy", bvy_config_to_json(bc)},
                    {"expected_slope", expected},
                    {"curve", to_json(curve)},
                    {"fit", to_json(fit)}});
    add_curve(res, fmt::format("curve_Nbar_{:g}", bc.N_bar), curve);
  }
  res.report["runs"] = runs;
}

void run_asymptotic(const ExperimentConfig& cfg, const SpaceInstance& space, const TestFunction& u,
                    ScenarioResult& res, Verdicts& v) {
  const RescaledCurve curve = rescaled_curve(space, u, cfg.bvy);
  const LimitFit fit = limit_fit(curve);
  const MCEstimate K = K_norm(space, u, cfg.bvy.p, cfg.bvy);
  v.within("limit vs K_norm", fit.limit, K.value, check_or(cfg.checks, "limit_tolerance", 0.05));
  if (cfg.checks.contains("closed_form"))
    v.within("K_norm vs closed form", K.value, cfg.checks.at("closed_form").get<double>(),
             check_or(cfg.checks, "closed_form_tolerance", 0.02));
  res.report["curve"] = to_json(curve);
  res.report["fit"] = to_json(fit);
  res.report["K_norm"] = to_json(K);
  add_curve(res, "curve", curve);
}

void run_diagnose(const ExperimentConfig& cfg, const SpaceInstance& space, ScenarioResult& res, Verdicts& v) {
  const json& d = cfg.diagnostics;
  const auto radii = radii_from(d, space, "doubling_radii", {0.1, 0.05, 0.02, 0.01, 0.005, 0.002});
  DoublingOptions opt;
  opt.include_boundary = d.value("include_boundary", false);
  const DoublingReport beta = estimate_beta(space, d.value("n_points", std::size_t{2000}), radii, cfg.seed, opt);
  const double N = cfg.checks.value("N", space.hom_dim());
  const DensityReport density = density_for(space, N, cfg);
  VolumeLowerOptions vopt;
  vopt.r_min = d.value("r_min", 0.0);
  vopt.r_max = d.value("r_max", 0.0);
  const VolumeLowerReport vol =
      check_volume_lower(space, beta.beta_hat, d.value("n_trials", std::size_t{10000}), cfg.seed + 1, vopt);
  if (cfg.checks.contains("expected_dimension"))
    v.le("|dimension_hat - expected| <= tol",
         std::abs(beta.dimension_hat - cfg.checks.at("expected_dimension").get<double>()),
         check_or(cfg.checks, "dimension_tolerance", 0.1));
  v.le("volume lower bound violations", static_cast<double>(vol.violations), 0.0);
  v.le("a_hat <= b_hat", density.a_hat, density.b_hat);
  res.report["doubling"] = to_json(beta);
  res.report["density"] = to_json(density);
  res.report["volume_lower"] = to_json(vol);
  std::ostringstream traces;
  write_traces_csv(density, traces);
  res.files["traces.csv"] = traces.str();
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::VerifyBvyEuclidean: return "verify-bvy-euclidean";
    case Scenario::VerifyBounds: return "verify-bounds";
    case Scenario::VerifyOptimality: return "verify-optimality";
    case Scenario::VerifyAsymptotic: return "verify-asymptotic";
    case Scenario::DiagnoseSpace: return "diagnose-space";
    case Scenario::Golden1d: return "golden-1d";
  }
  return "?";
}

Scenario scenario_from_string(std::string_view name) {
  for (auto s : kScenarios)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    cfg.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
    if (!doc.contains("seed")) throw ConfigError("seed is mandatory");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.output_dir = doc.value("output_dir", std::string("out/") + std::string(to_string(cfg.scenario)));
    cfg.checks = doc.value("checks", json::object());
    cfg.diagnostics = doc.value("diagnostics", json::object());

    if (cfg.scenario == Scenario::Golden1d) {
      cfg.space = doc.value("space", json{{"kind", "EuclideanBox"}, {"window", {{0.0, 1.0}}}});
      cfg.function = doc.value("function", json{{"formula", "linear"}});
      BVYConfig golden;
      golden.p = 2.0;
      golden.N_bar = 1.0;
      golden.lambda_ladder = {2, 3, 4, 6, 8, 10};
      golden.n_pairs = 1000000;
      golden.estimator = EstimatorKind::Direct;
      cfg.bvy = bvy_config_from_json(doc.value("bvy", json::object()), golden);
    } else {
      cfg.space = doc.at("space");
      if (cfg.scenario != Scenario::DiagnoseSpace) cfg.function = doc.at("function");
      const json bj = doc.value("bvy", json::object());
      cfg.bvy = bvy_config_from_json(bj, {});
      if (!bj.contains("N_bar")) cfg.bvy.N_bar = space_from_json(cfg.space).hom_dim();
    }
    if (doc.contains("bvy") && doc.at("bvy").contains("seed"))
      throw ConfigError("the seed belongs at the top level of the config");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.bvy.seed = cfg.seed;

  const SpaceInstance space = space_from_json(cfg.space);
  if (cfg.scenario == Scenario::DiagnoseSpace) return cfg;
  const TestFunction u = function_from_json(space, cfg.function);
  if (cfg.scenario != Scenario::VerifyOptimality || !cfg.bvy.lambda_ladder.empty()) validate(cfg.bvy);
  if (cfg.bvy.estimator == EstimatorKind::Localized && !space.supports_ball_sampling())
    throw CapabilityError(std::string(to_string(space.kind())) + " cannot run the localized estimator");
  switch (cfg.scenario) {
    case Scenario::Golden1d:
      if (space.kind() != SpaceKind::EuclideanBox || space.topo_dim() != 1 || u.formula != FormulaId::Linear)
        throw CapabilityError("golden-1d needs a linear function on a 1-D EuclideanBox");
      break;
    case Scenario::VerifyBvyEuclidean:
      if (space.kind() != SpaceKind::EuclideanBox) throw CapabilityError("verify-bvy-euclidean needs an EuclideanBox");
      if (!u.analytic) throw CapabilityError("verify-bvy-euclidean needs analytic gradients");
      break;
    case Scenario::VerifyAsymptotic:
      if (!space.supports_dilation()) throw CapabilityError(std::string(to_string(space.kind())) + " has no tangent cone");
      if (!u.analytic) throw CapabilityError("verify-asymptotic needs analytic differentials");
      break;
    default: break;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  const SpaceInstance space = space_from_json(cfg.space);
  ScenarioResult res;
  Verdicts v;
  res.report["scenario"] = std::string(to_string(cfg.scenario));
  res.report["seed"] = cfg.seed;
  res.report["space"] = space_to_json(space);
  res.report["bvy"] = bvy_config_to_json(cfg.bvy);
  res.report["checks"] = cfg.checks;
  res.report["diagnostics_budget"] = cfg.diagnostics;
  if (cfg.scenario == Scenario::DiagnoseSpace) {
    run_diagnose(cfg, space, res, v);
  } else {
    const TestFunction u = function_from_json(space, cfg.function);
    res.report["function"] = function_to_json(u);
    switch (cfg.scenario) {
      case Scenario::Golden1d: run_golden(cfg, space, u, res, v); break;
      case Scenario::VerifyBvyEuclidean: run_bvy_euclidean(cfg, space, u, res, v); break;
      case Scenario::VerifyBounds: run_bounds(cfg, space, u, res, v); break;
      case Scenario::VerifyOptimality: run_optimality(cfg, space, u, res, v); break;
      case Scenario::VerifyAsymptotic: run_asymptotic(cfg, space, u, res, v); break;
      default: break;
    }
  }
  res.pass = v.pass();
  res.report["assertions"] = v.items();
  res.report["verdict"] = res.pass ? "pass" : "fail";
  res.files["report.json"] = res.report.dump(2) + "\n";
  return res;
}

void write_outputs(const ExperimentConfig& cfg, const ScenarioResult& result) {
  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& [name, contents] : result.files) {
    std::ofstream out(cfg.output_dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (cfg.output_dir / name).string());
    out << contents;
  }
}

json catalogue() {
  json spaces = json::array();
  for (auto k : {SpaceKind::EuclideanBox, SpaceKind::WeightedEuclidean, SpaceKind::BanachBox, SpaceKind::Heisenberg1,
                 SpaceKind::FatCantor})
    spaces.push_back(std::string(to_string(k)));
  json formulas = json::array();
  for (auto f : {FormulaId::Linear, FormulaId::SmoothBump, FormulaId::Cone, FormulaId::ProductSine,
                 FormulaId::HeisCoord})
    formulas.push_back(std::string(to_string(f)));
  json scenarios = json::array();
  for (auto s : kScenarios) scenarios.push_back(std::string(to_string(s)));
  return {{"spaces", spaces}, {"functions", formulas}, {"scenarios", scenarios}};
}

}  // namespace bvy
