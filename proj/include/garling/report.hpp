#pragma once

#include <string>

#include "json.hpp"

namespace garling {

// Fixed 17-significant-digit decimal rendering (%.17g): every finite double
// round-trips, and identical values produce identical bytes on every
// platform, which is what makes reports byte-reproducible.
std::string format_double_17(double x);

// Deterministic JSON rendering: object keys in nlohmann's sorted order,
// doubles through format_double_17, no whitespace variance.  `indent` < 0
// emits one line; otherwise pretty-prints with that many spaces per level.
std::string canonical_json(const nlohmann::json& j, int indent = -1);

// Minimal CSV field quoting (RFC 4180 style: quote when the field contains a
// comma, quote, or newline).
std::string csv_field(const std::string& s);

}  // namespace garling
