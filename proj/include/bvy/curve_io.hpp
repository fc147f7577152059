#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bvy/estimator.hpp"

namespace bvy {

/// One line of a curve CSV: lambda, M_hat, M_stderr, rescaled, estimator, n_outer, n_inner, seed.
struct CurveRecord {
  double lambda = 0.0;
  double m_hat = 0.0;
  double m_stderr = 0.0;
  double rescaled = 0.0;
  std::string estimator;
  std::size_t n_outer = 0;
  std::size_t n_inner = 0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kCurveHeader = "lambda,M_hat,M_stderr,rescaled,estimator,n_outer,n_inner,seed";

std::vector<CurveRecord> curve_records(const RescaledCurve& curve);

void write_curve_csv(const RescaledCurve& curve, std::ostream& out);

/// Throws ParseError carrying the 1-based line number of the first bad line;
/// a file without data rows is an error.
std::vector<CurveRecord> read_curve_csv(std::istream& in);

}  // namespace bvy
