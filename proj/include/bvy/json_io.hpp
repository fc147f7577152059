#pragma once

#include <json.hpp>

#include "bvy/diagnostics.hpp"
#include "bvy/estimator.hpp"

namespace bvy {

using json = nlohmann::json;

/// {"kind", "window": [[lo, hi], ...], "q"?: number | "inf", "depth"?, "params"?: {"weight", "ratio"}}
SpaceInstance space_from_json(const json& j);
json space_to_json(const SpaceInstance& space);

/// {"formula_id", "params"?: {...}, "support_box"?: [[lo, hi], ...], "scale"?, "analytic"?}.
/// "formula" and "support" are accepted as short spellings.
TestFunction function_from_json(const SpaceInstance& space, const json& j);
json function_to_json(const TestFunction& u);

/// Keys mirror the BVYConfig fields. "lambda_ladder" is either an explicit
/// increasing list or {"min", "max", "rungs"} for a log-spaced ladder.
BVYConfig bvy_config_from_json(const json& j, BVYConfig base = {});
json bvy_config_to_json(const BVYConfig& cfg);

std::vector<double> log_ladder(double lo, double hi, int rungs);

Box box_from_json(const json& j);
json box_to_json(const Box& box);
json point_to_json(const Point& p);

json to_json(const MCEstimate& e);
json to_json(const RescaledCurve& curve);
json to_json(const LimitFit& fit);
json to_json(const GradNorms& g);
json to_json(const BoundReport& r);
json to_json(const DoublingReport& r);
/// Summary only; the traces go to CSV.
json to_json(const DensityReport& r);
json to_json(const VolumeLowerReport& r);

}  // namespace bvy
