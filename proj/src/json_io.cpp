#include "bvy/json_io.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bvy/errors.hpp"

namespace bvy {
namespace {

Point point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim)
    throw ConfigError(std::string(what) + " must be a list of 1 to 3 numbers");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return p;
}

double q_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("q must be a number or \"inf\"");
  }
  return j.get<double>();
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Box box_from_json(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim) throw ConfigError("box must be a list of 1 to 3 [lo, hi] pairs");
  const auto n = static_cast<Eigen::Index>(j.size());
  Box b{Point(n), Point(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& side = j[static_cast<std::size_t>(i)];
    if (!side.is_array() || side.size() != 2) throw ConfigError("box sides must be [lo, hi] pairs");
    b.lo[i] = side[0].get<double>();
    b.hi[i] = side[1].get<double>();
  }
  return b;
}

json box_to_json(const Box& box) {
  json out = json::array();
  for (int i = 0; i < box.dim(); ++i) out.push_back({box.lo[i], box.hi[i]});
  return out;
}

json point_to_json(const Point& p) {
  json out = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(p[i]);
  return out;
}

SpaceInstance space_from_json(const json& j) {
  try {
    const SpaceKind kind = space_kind_from_string(j.at("kind").get<std::string>());
    const json params = j.value("params", json::object());
    switch (kind) {
      case SpaceKind::EuclideanBox: return SpaceInstance::euclidean_box(box_from_json(j.at("window")));
      case SpaceKind::WeightedEuclidean:
        return SpaceInstance::weighted_euclidean(box_from_json(j.at("window")),
                                                 weight_id_from_string(params.value("weight", "sine")));
      case SpaceKind::BanachBox:
        return SpaceInstance::banach_box(box_from_json(j.at("window")), q_from_json(j.value("q", json(2.0))));
      case SpaceKind::Heisenberg1: return SpaceInstance::heisenberg(box_from_json(j.at("window")));
      case SpaceKind::FatCantor: {
        double lo = 0.0, hi = 1.0;
        if (j.contains("window")) {
          const Box w = box_from_json(j.at("window"));
          if (w.dim() != 1) throw ConfigError("FatCantor window must be one interval");
          lo = w.lo[0];
          hi = w.hi[0];
        }
        return SpaceInstance::fat_cantor(params.value("ratio", 0.25), j.value("depth", 12), lo, hi);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("space descriptor: ") + e.what());
  }
  throw ConfigError("unsupported space descriptor");
}

json space_to_json(const SpaceInstance& space) {
  json out{{"kind", std::string(to_string(space.kind()))}, {"window", box_to_json(space.window())}};
  switch (space.kind()) {
    case SpaceKind::BanachBox:
      out["q"] = std::isinf(space.q()) ? json("inf") : json(space.q());
      break;
    case SpaceKind::WeightedEuclidean:
      out["params"] = {{"weight", std::string(to_string(space.weight().id))}};
      break;
    case SpaceKind::FatCantor:
      out["depth"] = space.cantor().depth;
      out["params"] = {{"ratio", space.cantor().ratio}};
      break;
    default: break;
  }
  return out;
}

TestFunction function_from_json(const SpaceInstance& space, const json& j) {
  try {
    const json& name = j.contains("formula_id") ? j.at("formula_id") : j.at("formula");
    const FormulaId id = formula_id_from_string(name.get<std::string>());
    const json pj = j.value("params", json::object());
    FunctionParams params;
    read_if(pj, "slope", params.slope);
    read_if(pj, "offset", params.offset);
    read_if(pj, "amplitude", params.amplitude);
    read_if(pj, "height", params.height);
    read_if(pj, "frequency", params.frequency);
    if (pj.contains("center")) params.center = point_from_json(pj.at("center"), "center");
    if (pj.contains("half_width")) params.half_width = point_from_json(pj.at("half_width"), "half_width");
    if (pj.contains("inner")) params.inner = point_from_json(pj.at("inner"), "inner");
    if (pj.contains("outer")) params.outer = point_from_json(pj.at("outer"), "outer");
    std::optional<Box> support;
    if (j.contains("support_box"))
      support = box_from_json(j.at("support_box"));
    else if (j.contains("support"))
      support = box_from_json(j.at("support"));
    TestFunction u = make_function(space, id, params, support);
    u = u.scaled(j.value("scale", 1.0));
    if (!j.value("analytic", true)) u = u.without_analytic();
    return u;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("function descriptor: ") + e.what());
  }
}

json function_to_json(const TestFunction& u) {
  const FunctionParams& p = u.params;
  json params{{"slope", p.slope},   {"offset", p.offset},       {"amplitude", p.amplitude},
              {"height", p.height}, {"frequency", p.frequency}};
  if (p.center.size()) params["center"] = point_to_json(p.center);
  if (p.half_width.size()) params["half_width"] = point_to_json(p.half_width);
  if (p.inner.size()) params["inner"] = point_to_json(p.inner);
  if (p.outer.size()) params["outer"] = point_to_json(p.outer);
  return {{"formula_id", std::string(to_string(u.formula))},
          {"params", params},
          {"support_box", box_to_json(u.support)},
          {"scale", u.scale},
          {"analytic", u.analytic}};
}

std::vector<double> log_ladder(double lo, double hi, int rungs) {
  if (!(lo > 0.0 && hi > lo) || rungs < 2) throw ConfigError("log ladder needs 0 < min < max and at least 2 rungs");
  std::vector<double> out;
  const double step = std::log(hi / lo) / (rungs - 1);
  for (int i = 0; i < rungs; ++i) out.push_back(i == rungs - 1 ? hi : lo * std::exp(step * i));
  return out;
}

BVYConfig bvy_config_from_json(const json& j, BVYConfig cfg) {
  try {
    read_if(j, "p", cfg.p);
    read_if(j, "N_bar", cfg.N_bar);
    if (j.contains("lambda_ladder")) {
      const json& l = j.at("lambda_ladder");
      if (l.is_object())
        cfg.lambda_ladder = log_ladder(l.at("min").get<double>(), l.at("max").get<double>(), l.value("rungs", 6));
      else
        cfg.lambda_ladder = l.get<std::vector<double>>();
    }
    read_if(j, "n_outer", cfg.n_outer);
    read_if(j, "n_inner", cfg.n_inner);
    read_if(j, "n_pairs", cfg.n_pairs);
    read_if(j, "epsilon_loc", cfg.epsilon_loc);
    read_if(j, "seed", cfg.seed);
    if (j.contains("estimator")) cfg.estimator = estimator_kind_from_string(j.at("estimator").get<std::string>());
    read_if(j, "n_grad", cfg.n_grad);
    read_if(j, "n_shell", cfg.n_shell);
    read_if(j, "shell_eps", cfg.shell_eps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bvy block: ") + e.what());
  }
  return cfg;
}

json bvy_config_to_json(const BVYConfig& cfg) {
  return {{"p", cfg.p},
          {"N_bar", cfg.N_bar},
          {"lambda_ladder", cfg.lambda_ladder},
          {"n_outer", cfg.n_outer},
          {"n_inner", cfg.n_inner},
          {"n_pairs", cfg.n_pairs},
          {"epsilon_loc", cfg.epsilon_loc},
          {"seed", cfg.seed},
          {"estimator", std::string(to_string(cfg.estimator))},
          {"n_grad", cfg.n_grad},
          {"n_shell", cfg.n_shell},
          {"shell_eps", cfg.shell_eps}};
}

json to_json(const MCEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}, {"seed", e.seed}};
}

json to_json(const RescaledCurve& curve) {
  json rows = json::array();
  for (const auto& r : curve.rows)
    rows.push_back({{"lambda", r.lambda},
                    {"M_hat", to_json(r.m_hat)},
                    {"rescaled", r.rescaled},
                    {"rescaled_std_error", r.rescaled_std_error},
                    {"estimator", std::string(to_string(r.estimator))},
                    {"n_outer", r.n_outer},
                    {"n_inner", r.n_inner}});
  return {{"p", curve.p}, {"rows", rows}};
}

json to_json(const LimitFit& fit) {
  return {{"plateau_median", {{"limit", fit.limit}, {"rungs", fit.plateau_rungs}}},
          {"loglog_ls",
           {{"slope", fit.slope},
            {"slope_std_error", fit.slope_stderr},
            {"residual_rms", fit.residual_rms},
            {"diverges_to_zero", fit.diverges_to_zero}}}};
}

json to_json(const GradNorms& g) {
  return {{"lip_p", to_json(g.lip_p)}, {"lower_integrand", to_json(g.lower_integrand)}, {"analytic", g.analytic}};
}

json to_json(const BoundReport& r) {
  return {{"curve", to_json(r.curve)}, {"fit", to_json(r.fit)}, {"norms", to_json(r.norms)},
          {"N", r.N},                  {"a_hat", r.a_hat},      {"b_hat", r.b_hat},
          {"C1", r.C1},                {"C2", r.C2},            {"lower", r.lower},
          {"upper", r.upper},          {"lower_margin", r.lower_margin},
          {"upper_margin", r.upper_margin},
          {"pass", r.pass}};
}

json to_json(const DoublingReport& r) {
  return {{"beta_hat", r.beta_hat},
          {"dimension_hat", r.dimension_hat},
          {"samples", r.samples},
          {"skipped_zero_mass", r.skipped_zero_mass},
          {"skipped_boundary", r.skipped_boundary},
          {"radius_range", {r.r_min, r.r_max}},
          {"worst_case", {{"point", point_to_json(r.worst_point)}, {"radius", r.worst_radius}}},
          {"exact", r.exact}};
}

json to_json(const DensityReport& r) {
  return {{"N", r.N}, {"a_hat", r.a_hat}, {"b_hat", r.b_hat}, {"radii", r.radii}, {"points", r.points.size()}};
}

json to_json(const VolumeLowerReport& r) {
  const VolumeTuple& w = r.witness;
  return {{"beta", r.beta},
          {"n_trials", r.n_trials},
          {"violations", r.violations},
          {"min_slack", r.min_slack},
          {"witness",
           {{"x0", point_to_json(w.x0)},
            {"r0", w.r0},
            {"x", point_to_json(w.x)},
            {"r", w.r},
            {"lhs", w.lhs},
            {"rhs", w.rhs}}},
          {"pass", r.pass}};
}

}  // namespace bvy
