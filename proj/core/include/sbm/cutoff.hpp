#pragma once

#include <vector>

namespace sbm {

// Smooth radial cutoff chi = eta_m * 1_{B(0,R)}: the indicator of a ball of
// radius R convolved with the normalised bump eta_m(x) = m^{-d} eta(x/m),
// eta(x) = C_d exp(1/(|x|^2 - 1)) on |x| < 1. chi = 1 on |x| <= R - m and 0 on
// |x| >= R + m.
class SmoothCutoff {
 public:
  SmoothCutoff(int dim, double ball_radius, double mollifier_radius);

  int dim() const { return dim_; }
  double ball_radius() const { return ball_; }
  double mollifier_radius() const { return moll_; }

  // Radial bump profile eta_m(s) and its derivative in s.
  double bump(double s) const;
  double bump_derivative(double s) const;

  double value(double r) const;
  // d chi / dr and the Laplacian, from surface integrals over dB (d = 3).
  double derivative(double r) const;
  double laplacian(double r) const;

 private:
  int dim_;
  double ball_;
  double moll_;
  double norm_;  // C_d m^{-d}
};

// The d=3 cutoff with chi = 1 on |x| <= 1/2 and 0 on |x| >= 1 (ball radius 3/4,
// mollifier radius 1/4). value() is served from a 4096-point table.
const SmoothCutoff& cutoff_half();
double chi_half(double r);

// chi_N = eta * 1_{B(0,N)} with the unit-radius bump.
double cutoff_chi(int dim, double big_n, double r);

// Components of the d=3 log-corrected kernel built on chi_half, as functions of
// r = |y - x|:
//   g(r) = log r chi(r),  f(r) = log(1/r)(chi(r) - 1) for r < 1 else 0,
//   h(r) = Laplacian g(r) - 1/r^2 (zero for r < 1/2).
struct GBarComponents {
  double g = 0.0;
  double f = 0.0;
  double h = 0.0;
  double laplacian_g = 0.0;
  bool singular = false;  // r == 0
};
GBarComponents gbar_components(double r);

// sup_r r^2 |Laplacian g(r)| over a dense grid in (0, 1]; the finite constant
// that bounds |Laplacian g| by C/r^2.
double gbar_laplacian_constant();

}  // namespace sbm
