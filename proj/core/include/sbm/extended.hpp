#pragma once

#include <limits>
#include <ostream>
#include <string>

namespace sbm {

// A real value or a tagged +infinity. Potentials are infinite at the pole and,
// in d=2, for t = infinity; callers must branch instead of comparing to a
// sentinel float.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by design

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  // Throws if infinite; use when the caller has already excluded the pole.
  double value() const;
  double value_or(double fallback) const { return infinite_ ? fallback : value_; }
  double to_double() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  std::string str() const;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v);

// Time horizon that may be infinite (run-to-extinction, Green's function).
struct TimeHorizon {
  double t = 1.0;
  bool infinite = false;

  static TimeHorizon finite(double t) { return {t, false}; }
  static TimeHorizon forever() { return {0.0, true}; }
};

}  // namespace sbm
