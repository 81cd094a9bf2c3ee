// Fixed catalog of data functions selectable from run configurations:
// constant, affine, product of sines over the box, Gaussian bump.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bqm/common.hpp"
#include "bqm/operator.hpp"

namespace bqm {

struct DataFunction {
  enum class Kind { constant, affine, sin_product, gaussian };

  Kind kind = Kind::constant;
  double value = 0.0;                     // constant
  double intercept = 0.0;                 // affine
  std::array<double, 2> slope{0.0, 0.0};  // affine
  double amplitude = 0.0;                 // sin_product, gaussian
  std::array<double, 2> center{0.5, 0.5}; // gaussian
  double width = 0.25;                    // gaussian
  Box box = Box::unit(1);                 // normalizes sin_product

  static DataFunction constant(double v) {
    DataFunction d;
    d.kind = Kind::constant;
    d.value = v;
    return d;
  }

  static DataFunction affine(double intercept, std::array<double, 2> slope) {
    DataFunction d;
    d.kind = Kind::affine;
    d.intercept = intercept;
    d.slope = slope;
    return d;
  }

  static DataFunction sin_product(double amplitude, const Box& box) {
    DataFunction d;
    d.kind = Kind::sin_product;
    d.amplitude = amplitude;
    d.box = box;
    return d;
  }

  static DataFunction gaussian(double amplitude, std::array<double, 2> center,
                               double width) {
    detail::require(width > 0.0, "gaussian data function: width must be > 0");
    DataFunction d;
    d.kind = Kind::gaussian;
    d.amplitude = amplitude;
    d.center = center;
    d.width = width;
    return d;
  }

  double operator()(const Point& x) const {
    switch (kind) {
      case Kind::constant:
        return value;
      case Kind::affine: {
        double v = intercept;
        for (int a = 0; a < 2; ++a) v += slope[a] * x[a];
        return v;
      }
      case Kind::sin_product: {
        double v = amplitude;
        for (int a = 0; a < box.dim; ++a) {
          const double t = (x[a] - box.lo[a]) / (box.hi[a] - box.lo[a]);
          v *= std::sin(std::numbers::pi * t);
        }
        return v;
      }
      case Kind::gaussian: {
        double q = 0.0;
        for (int a = 0; a < box.dim; ++a) {
          const auto aa = static_cast<std::size_t>(a);
          const double d = x[aa] - center[aa];
          q += d * d;
        }
        return amplitude * std::exp(-q / (2.0 * width * width));
      }
    }
    return 0.0;
  }

  /// Wrap as a plain callable for OperatorSpec construction.
  ScalarFn fn() const {
    return [d = *this](const Point& x) { return d(x); };
  }

  static std::string kind_name(Kind k) {
    switch (k) {
      case Kind::constant: return "constant";
      case Kind::affine: return "affine";
      case Kind::sin_product: return "sin_product";
      case Kind::gaussian: return "gaussian";
    }
    return "?";
  }
};

}  // namespace bqm
