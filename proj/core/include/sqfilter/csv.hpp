#pragma once

#include <cstdio>
#include <string>

namespace sqf {

/// Scientific notation with 17 significant digits; round-trips any double.
inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

}  // namespace sqf
