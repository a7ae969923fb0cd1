#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace rbf {

/// Locale-independent rendering with 17 significant digits ('.' decimal).
/// Non-finite values are rendered as JSON/CSV-safe "null".
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace rbf
