#pragma once

#include <complex>
#include <cstdio>
#include <ostream>
#include <string>

namespace hermanlab::csv {

/// Tables use 12 significant digits, '.' decimal point, ',' separator.
inline std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string num(long long x) { return std::to_string(x); }
inline std::string num(long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(unsigned long x) { return std::to_string(x); }
inline std::string num(unsigned long long x) { return std::to_string(x); }

template <class... Ts> void row(std::ostream &os, const Ts &...cells) {
  bool first = true;
  ((os << (first ? "" : ",") << cells, first = false), ...);
  os << '\n';
}

} // namespace hermanlab::csv
