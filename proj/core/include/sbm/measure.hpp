#pragma once

#include <cstddef>
#include <vector>

#include "sbm/extended.hpp"
#include "sbm/space.hpp"

namespace sbm {

// Finite atomic initial measure mu = sum_i m_i delta_{y_i}.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(int dim) : dim_(dim) { require_dim(dim); }

  static AtomicMeasure delta(int dim, const SpacePoint& at = {}, double mass = 1.0);

  void add(const SpacePoint& at, double mass);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<SpacePoint>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  double total_mass() const;

  // mu(phi_x) = sum m_i / (2 pi |y_i - x|) in d = 3; infinite if x is an atom.
  ExtendedReal newtonian_potential(const SpacePoint& x) const;
  // sum m_i log+(1/|y_i - x|); infinite if x is an atom.
  ExtendedReal log_plus_potential(const SpacePoint& x) const;
  // For atomic mu the set where the potential is infinite is the atom set.
  bool in_bad_set(const SpacePoint& x) const;

 private:
  int dim_ = 3;
  std::vector<SpacePoint> points_;
  std::vector<double> masses_;
};

}  // namespace sbm
