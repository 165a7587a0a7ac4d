#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modhtan/types.hpp"

namespace modhtan::detail {

/// Shortest-ish decimal that round-trips a long double (21 significant digits).
std::string exact(Real value);
/// Compact decimal for reports and curve files.
std::string compact(Real value, int precision = 10);

/// Parses a whole token as a Real; throws std::invalid_argument otherwise.
Real parse_real(std::string_view token);

std::vector<std::string> split_fields(std::string_view line);

}  // namespace modhtan::detail
