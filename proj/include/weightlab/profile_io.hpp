#pragma once

#include <string>

#include <json.hpp>

#include "weightlab/profile.hpp"

namespace weightlab {

// Profile interchange format:
//   {"coordinate": "u" | "s",
//    "breakpoints": ["1", "0.5", ...],   decimal or p/q strings, 1 first
//    "values": ["3", "1/2", ...],        one fewer than breakpoints
//    "tail": {"mode": "forbid" | "geometric", "ratio": 0.5,
//             "inf": 0, "sup": "inf"}}   inf/sup optional range of f on (0, x_K]
// A profile given in u is converted to s; the geometric tail is rebuilt from
// the converted last piece.
StepProfile profile_from_json(const nlohmann::json& j);
StepProfile load_profile(const std::string& path);

// Materialized pieces with exact decimal strings. Tails other than forbid
// and geometric are written by mode name only and do not round-trip.
nlohmann::json profile_to_json(const StepProfile& p);

}  // namespace weightlab
