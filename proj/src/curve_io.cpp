#include "bvy/curve_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "bvy/errors.hpp"

namespace bvy {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, const char* name, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw ParseError(fmt::format("bad {} value '{}'", name, field), line);
  return value;
}

}  // namespace

std::vector<CurveRecord> curve_records(const RescaledCurve& curve) {
  std::vector<CurveRecord> out;
  for (const auto& r : curve.rows)
    out.push_back({r.lambda, r.m_hat.value, r.m_hat.std_error, r.rescaled, std::string(to_string(r.estimator)),
                   r.n_outer, r.n_inner, r.m_hat.seed});
  return out;
}

void write_curve_csv(const RescaledCurve& curve, std::ostream& out) {
  out << kCurveHeader << '\n';
  for (const auto& r : curve_records(curve))
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{}\n", r.lambda, r.m_hat, r.m_stderr, r.rescaled,
                       r.estimator, r.n_outer, r.n_inner, r.seed);
}

std::vector<CurveRecord> read_curve_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next()) throw ParseError("empty curve file", 1);
  if (line != kCurveHeader) throw ParseError(fmt::format("expected header '{}'", kCurveHeader), lineno);
  std::vector<CurveRecord> out;
  while (next()) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw ParseError(fmt::format("expected 8 fields, found {}", f.size()), lineno);
    CurveRecord r;
    r.lambda = parse_number<double>(f[0], "lambda", lineno);
    r.m_hat = parse_number<double>(f[1], "M_hat", lineno);
    r.m_stderr = parse_number<double>(f[2], "M_stderr", lineno);
    r.rescaled = parse_number<double>(f[3], "rescaled", lineno);
    r.estimator = std::string(f[4]);
    r.n_outer = parse_number<std::size_t>(f[5], "n_outer", lineno);
    r.n_inner = parse_number<std::size_t>(f[6], "n_inner", lineno);
    r.seed = parse_number<std::uint64_t>(f[7], "seed", lineno);
    if (!(r.lambda > 0.0)) throw ParseError("lambda must be positive", lineno);
    if (!out.empty() && !(r.lambda > out.back().lambda)) throw ParseError("lambda must increase", lineno);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ParseError("curve file has no data rows", lineno + 1);
  return out;
}

}  // namespace bvy
