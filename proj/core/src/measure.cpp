#include "sbm/measure.hpp"

#include <numeric>

namespace sbm {

AtomicMeasure AtomicMeasure::delta(int dim, const SpacePoint& at, double mass) {
  AtomicMeasure m(dim);
  m.add(at, mass);
  return m;
}

void AtomicMeasure::add(const SpacePoint& at, double mass) {
  if (!(mass > 0.0)) throw DomainError("atom mass must be positive");
  points_.push_back(at);
  masses_.push_back(mass);
}

double AtomicMeasure::total_mass() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

ExtendedReal AtomicMeasure::newtonian_potential(const SpacePoint& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double r = distance(points_[i], x, dim_);
    if (r == 0.0) return ExtendedReal::infinity();
    s += masses_[i] * constants::green3 / r;
  }
  return s;
}

ExtendedReal AtomicMeasure::log_plus_potential(const SpacePoint& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double r = distance(points_[i], x, dim_);
    if (r == 0.0) return ExtendedReal::infinity();
    s += masses_[i] * log_plus(1.0 / r);
  }
  return s;
}

bool AtomicMeasure::in_bad_set(const SpacePoint& x) const {
  for (const auto& p : points_) {
    if (distance(p, x, dim_) == 0.0) return true;
  }
  return false;
}

}  // namespace sbm
