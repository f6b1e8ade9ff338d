#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "geoflow/edit.hpp"
#include "geoflow/tangent.hpp"

namespace geoflow {

// %.17g (round-trippable); NaN prints as "nan" regardless of platform sign
std::string format_double(double v);

nlohmann::json frame_to_json(const TangentFrame& frame);

// one row per iteration: iter, loss, tube_dist, deviation, refresh_flag,
// then the x coordinates
std::string trace_to_csv(const EditTrace& trace);
nlohmann::json trace_to_json(const EditTrace& trace);

// Canonical serialization for hashing: sorted keys, %.17g float formatting.
std::string canonical_json(const nlohmann::json& j);
std::uint64_t fnv1a64(std::string_view s);
// 16 hex digits of fnv1a64(canonical_json(config))
std::string config_hash(const nlohmann::json& config);

}  // namespace geoflow
