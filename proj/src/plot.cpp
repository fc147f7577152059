#include "bvy/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "bvy/errors.hpp"

namespace bvy {
namespace {

constexpr double kWidth = 640.0;
constexpr double kPanel = 240.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kGap = 50.0;

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range span(const std::vector<double>& a, const std::vector<double>& b) {
  Range r{INFINITY, -INFINITY};
  for (const auto* v : {&a, &b})
    for (double x : *v) {
      r.lo = std::min(r.lo, x);
      r.hi = std::max(r.hi, x);
    }
  if (!std::isfinite(r.lo)) return {0.0, 1.0};
  const double pad = r.hi > r.lo ? 0.05 * (r.hi - r.lo) : std::max(0.5, 0.05 * std::abs(r.lo));
  return {r.lo - pad, r.hi + pad};
}

void panel(std::string& svg, const PlotSeries& s, const Range& xr, double top, const char* colour) {
  Range yr = span(s.y_lo, s.y_hi);
  const Range yv = span(s.y, s.y);
  yr = {std::min(yr.lo, yv.lo), std::max(yr.hi, yv.hi)};
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); };
  auto py = [&](double y) { return top + kPanel - (y - yr.lo) / (yr.hi - yr.lo) * kPanel; };

  svg += fmt::format(R"(<g class="panel" data-series="{}">)" "\n", s.name);
  svg += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="none" stroke="#444"/>)" "\n",
                     kLeft, top, kWidth - kLeft - kRight, kPanel);
  svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="13">{}</text>)" "\n", kLeft, top - 8.0, s.name);
  for (int k = 0; k <= 4; ++k) {
    const double y = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="10" text-anchor="end">{:.4g}</text>)" "\n",
                       kLeft - 4.0, py(y) + 3.0, y);
    const double x = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="10" text-anchor="middle">{:.3g}</text>)" "\n", px(x),
                       top + kPanel + 14.0, x);
  }
  std::string path;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    path += fmt::format("{}{:.2f},{:.2f}", i ? " L" : "M", px(s.x[i]), py(s.y[i]));
  if (!path.empty())
    svg += fmt::format(R"(<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>)" "\n", path, colour);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    svg += fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="{3}"/>)" "\n", px(s.x[i]),
                       py(s.y_lo[i]), py(s.y_hi[i]), colour);
    svg += fmt::format(
        R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="{}" data-x="{:.17g}" data-y="{:.17g}" data-err-lo="{:.17g}" data-err-hi="{:.17g}"/>)"
        "\n",
        px(s.x[i]), py(s.y[i]), colour, s.x[i], s.y[i], s.y_lo[i], s.y_hi[i]);
  }
  svg += "</g>\n";
}

}  // namespace

PlotData plot_data(const std::vector<CurveRecord>& rows) {
  PlotData d;
  d.log_m.name = "log10 M_hat";
  d.rescaled.name = "lambda^p M_hat";
  for (const auto& r : rows) {
    const double x = std::log10(r.lambda);
    const double scale = r.m_hat > 0.0 ? r.rescaled / r.m_hat : 0.0;
    d.rescaled.x.push_back(x);
    d.rescaled.y.push_back(r.rescaled);
    d.rescaled.y_lo.push_back(r.rescaled - scale * r.m_stderr);
    d.rescaled.y_hi.push_back(r.rescaled + scale * r.m_stderr);
    if (r.m_hat > 0.0) {
      d.log_m.x.push_back(x);
      d.log_m.y.push_back(std::log10(r.m_hat));
      const double lo = r.m_hat - r.m_stderr;
      d.log_m.y_lo.push_back(lo > 0.0 ? std::log10(lo) : std::log10(r.m_hat) - 1.0);
      d.log_m.y_hi.push_back(std::log10(r.m_hat + r.m_stderr));
    }
  }
  return d;
}

std::string render_svg(const PlotData& data) {
  const double height = kTop + 2.0 * kPanel + kGap + 40.0;
  const Range xr = span(data.rescaled.x, data.rescaled.x);
  std::string svg = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)" "\n",
      kWidth, height, kWidth, height);
  svg += fmt::format(R"(<rect width="{:.0f}" height="{:.0f}" fill="white"/>)" "\n", kWidth, height);
  panel(svg, data.log_m, xr, kTop, "#1f77b4");
  panel(svg, data.rescaled, xr, kTop + kPanel + kGap, "#d62728");
  svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle">log10 lambda</text>)" "\n",
                     0.5 * (kLeft + kWidth - kRight), height - 6.0);
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::filesystem::path& curve_csv, const std::filesystem::path& out_svg) {
  std::ifstream in(curve_csv, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + curve_csv.string());
  const std::string svg = render_svg(plot_data(read_curve_csv(in)));
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + out_svg.string());
  out << svg;
}

}  // namespace bvy
