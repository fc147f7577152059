#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bvy/errors.hpp"
#include "bvy/experiment.hpp"
#include "bvy/plot.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kAssertionFail = 1;
constexpr int kConfigError = 2;

int run(const std::string& config_path, const std::string& output_dir) {
  auto cfg = bvy::load_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const auto start = std::chrono::steady_clock::now();
  const auto result = bvy::run_scenario(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bvy::write_outputs(cfg, result);

  for (const auto& a : result.report.at("assertions"))
    std::cout << fmt::format("{:4}  {}  ({:.6g} <= {:.6g})\n", a.at("pass").get<bool>() ? "ok" : "FAIL",
                             a.at("name").get<std::string>(), a.at("left").get<double>(),
                             a.at("right").get<double>());
  std::cout << fmt::format("{}: {}  [{:.2f} s, outputs in {}]\n", bvy::to_string(cfg.scenario),
                           result.pass ? "pass" : "fail", seconds, cfg.output_dir.string());
  return result.pass ? kPass : kAssertionFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo estimates of BVY-type functionals on metric measure spaces"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a JSON config");
  run_cmd->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output-dir", output_dir, "Override the config's output_dir");

  std::string csv_path, svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "Render a curve CSV as an SVG log-log plot");
  plot_cmd->add_option("curve", csv_path, "Curve CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("svg", svg_path, "Output SVG")->required();

  app.add_subcommand("catalogue", "List spaces, functions and scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return run(config_path, output_dir);
    if (*plot_cmd) {
      bvy::emit_plot(csv_path, svg_path);
      return kPass;
    }
    std::cout << bvy::catalogue().dump(2) << '\n';
    return kPass;
  } catch (const bvy::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const bvy::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kConfigError;
}
