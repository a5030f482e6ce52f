#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace lipext::detail {

// lhs <= rhs up to a tolerance that is absolute near zero and relative for
// large magnitudes.
inline bool within(double lhs, double rhs, double tol) {
  return lhs <= rhs + tol * std::max(1.0, std::abs(rhs));
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string pair_witness(std::size_t x, std::size_t y) {
  return "pair (" + std::to_string(x) + "," + std::to_string(y) + ")";
}

}  // namespace lipext::detail
