#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "sbm/errors.hpp"

namespace sbm {

// Points live in R^2 or R^3; the third coordinate is ignored (and kept 0) in d=2.
struct SpacePoint {
  std::array<double, 3> coords{0.0, 0.0, 0.0};

  static SpacePoint on_axis(double r) { return SpacePoint{{r, 0.0, 0.0}}; }

  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }
  bool operator==(const SpacePoint&) const = default;
};

inline double distance_sq(const SpacePoint& a, const SpacePoint& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return s;
}

inline double distance(const SpacePoint& a, const SpacePoint& b, int dim) {
  return std::sqrt(distance_sq(a, b, dim));
}

inline double norm(const SpacePoint& a, int dim) { return distance(a, SpacePoint{}, dim); }

inline void require_dim(int dim) {
  if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
}

inline double log_plus(double v) { return v > 1.0 ? std::log(v) : 0.0; }

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;
// Green's function prefactors: 1/(2 pi r) in d=3 and (1/pi) log(1/r) in d=2.
inline constexpr double green3 = 1.0 / (2.0 * pi);
inline constexpr double green2 = 1.0 / pi;
// Limiting variance slope 2 c^2 = 1/(2 pi^2) of the d=3 renormalised local time.
inline constexpr double variance_slope3 = 1.0 / (2.0 * pi * pi);
// Coefficient of lambda^2 log(1/r) in the second-order PDE asymptotics.
inline constexpr double pde_second_order = 1.0 / (4.0 * pi * pi);
}  // namespace constants

// Surface area of the unit sphere S^{d-1}.
inline double unit_sphere_area(int dim) {
  require_dim(dim);
  return dim == 2 ? 2.0 * constants::pi : 4.0 * constants::pi;
}

}  // namespace sbm
