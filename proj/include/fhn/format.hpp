#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace fhn {

// Shortest round-trip decimal form; identical bytes on every run and thread
// count, which keeps CSV payloads comparable with cmp.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

}  // namespace fhn
