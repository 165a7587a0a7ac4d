#include "text_format.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <fmt/format.h>

namespace modhtan::detail {

namespace {

std::string non_finite(Real value) {
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

}  // namespace

std::string exact(Real value) {
  if (!std::isfinite(value)) return non_finite(value);
  return fmt::format("{:.21g}", value);
}

std::string compact(Real value, int precision) {
  if (!std::isfinite(value)) return non_finite(value);
  return fmt::format("{:.{}g}", value, precision);
}

Real parse_real(std::string_view token) {
  const std::string text(token);
  if (text.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  errno = 0;
  const Real value = std::strtold(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE)
    throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

std::vector<std::string> split_fields(std::string_view line) {
  const bool comma = line.find(',') != std::string_view::npos;
  std::vector<std::string> fields;
  std::string current;
  auto flush = [&] {
    if (!current.empty() || comma) fields.push_back(current);
    current.clear();
  };
  for (const char c : line) {
    const bool sep = comma ? c == ',' : (c == ' ' || c == '\t' || c == '\r');
    if (sep) {
      flush();
    } else if (!(comma && (c == ' ' || c == '\t' || c == '\r'))) {
      current.push_back(c);
    }
  }
  if (!current.empty() || (comma && !fields.empty())) fields.push_back(current);
  return fields;
}

}  // namespace modhtan::detail
