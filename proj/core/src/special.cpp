#include "sbm/special.hpp"

#include <cmath>

#include "sbm/errors.hpp"
#include "sbm/space.hpp"

namespace sbm::special {

double expint_e1(double x) {
  if (!(x > 0.0)) throw DomainError("E1 needs x > 0");
  if (x > 700.0) return 0.0;
  return -std::expint(-x);
}

double bessel_i0e(double z) {
  if (z < 0.0) throw DomainError("I0e needs z >= 0");
  if (z < 50.0) return std::cyl_bessel_i(0.0, z) * std::exp(-z);
  // Large-argument expansion; terms shrink until k ~ 2z, far beyond 30 here.
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (8.0 * z * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * constants::pi * z);
}

double bessel_k0(double z) {
  if (!(z > 0.0)) throw DomainError("K0 needs z > 0");
  return std::cyl_bessel_k(0.0, z);
}

double gauss_time_integral(double c, double t) {
  if (!(t > 0.0)) return 0.0;
  c = std::abs(c);
  const double s = std::sqrt(2.0 * t);
  return std::sqrt(2.0 * t / constants::pi) * std::exp(-c * c / (2.0 * t)) - c * std::erfc(c / s);
}

}  // namespace sbm::special

// ExtendedReal lives here to keep the header free of iostream machinery.
#include <sstream>

#include "sbm/extended.hpp"

namespace sbm {

double ExtendedReal::value() const {
  if (infinite_) throw DomainError("value() on an infinite ExtendedReal");
  return value_;
}

std::string ExtendedReal::str() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v) { return os << v.str(); }

}  // namespace sbm
