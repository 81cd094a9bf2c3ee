// Shared basic types for the bqm library: points, boxes, errors.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bqm {

inline constexpr const char* kVersion = "bqm 0.1.0";

/// Base error for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}
}  // namespace detail

/// Spatial point. Only the first `dim` coordinates are meaningful;
/// unused coordinates are zero.
using Point = std::array<double, 2>;

/// Axis-aligned box domain in 1 or 2 dimensions.
struct Box {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  static Box unit(int dim) {
    detail::require(dim == 1 || dim == 2, "Box: dim must be 1 or 2");
    Box b;
    b.dim = dim;
    for (int a = 0; a < dim; ++a) {
      b.lo[a] = 0.0;
      b.hi[a] = 1.0;
    }
    return b;
  }

  static Box make(int dim, const std::array<double, 2>& lo,
                  const std::array<double, 2>& hi) {
    detail::require(dim == 1 || dim == 2, "Box: dim must be 1 or 2");
    for (int a = 0; a < dim; ++a)
      detail::require(lo[a] < hi[a], "Box: bounds must satisfy lo < hi");
    Box b;
    b.dim = dim;
    b.lo = lo;
    b.hi = hi;
    return b;
  }

  bool contains(const Point& x, double slack = 0.0) const {
    for (int a = 0; a < dim; ++a)
      if (x[a] < lo[a] - slack || x[a] > hi[a] + slack) return false;
    return true;
  }

  double diameter() const {
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
    return std::sqrt(d2);
  }
};

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace bqm
