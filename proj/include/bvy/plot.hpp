#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bvy/curve_io.hpp"

namespace bvy {

struct PlotSeries {
  std::string name;
  /// log10 λ
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_lo;
  std::vector<double> y_hi;
};

/// log10 M̂ (rows with M̂ > 0 only) and λ^p M̂, each with ±1 stderr bars.
struct PlotData {
  PlotSeries log_m;
  PlotSeries rescaled;
};

PlotData plot_data(const std::vector<CurveRecord>& rows);

/// Two stacked panels sharing the log λ axis. Every marker carries its
/// plotted value in data-x / data-y attributes.
std::string render_svg(const PlotData& data);

/// Reads the curve CSV and writes the SVG; a pure function of the CSV bytes.
void emit_plot(const std::filesystem::path& curve_csv, const std::filesystem::path& out_svg);

}  // namespace bvy
