#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

namespace ldade {

using Json = nlohmann::json;

/// Rounds to `digits` significant decimal digits. The result prints back
/// through the JSON writer with at most that many digits.
inline double round_sig(double x, int digits = 12) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

/// Report serialization: sorted keys (nlohmann objects are ordered maps),
/// two-space indent, trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

/// Real formatted for CSV output with 12 significant digits.
inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace ldade
