#pragma once

#include <string>
#include <vector>

#include "sbm/quadrature.hpp"

namespace sbm {

// ---------------------------------------------------------------------------
// Expectation identities behind the Tanaka-type decompositions. Each side is
// computed by a separate quadrature route; the residual should be ~0.

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
};

struct MeanIdentityReport {
  int dim = 3;
  double t = 0.0;
  double r = 0.0;
  std::vector<IdentityCheck> checks;
  double max_abs_residual() const;
};

// d=3: (a) (1/2) int_0^t E|B_s - x|^{-2} ds  vs  E log|B_t - x| - log|x|
//      (c) q_t(x)  vs  1/(2 pi |x|) - E 1/(2 pi |B_t - x|)
// d=2: (b) q_t(x) - (1/pi) log(1/|x|)  vs  (1/pi) E log|B_t - x|
MeanIdentityReport verify_mean_identities(int dim, double t, double r, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Kernel inequalities with the explicit constants their proofs produce.

// Sup over t of p_t at distance delta, times delta^d: (d / (2 pi e))^{d/2}.
double heat_sup_constant(int dim);

// Constant in int p_t(y) |y - x|^{-alpha} dy <= C |x|^{-alpha}:
//   2^alpha (1 + (d/(2 pi e))^{d/2} |S^{d-1}| / (d - alpha)).
double inverse_power_constant(double alpha, int dim);

// Right-hand sides.
double bessel_envelope(int dim, double t);            // (2 sqrt(d)/(d-1)) sqrt(t)
double inverse_square_envelope(double r, double t);   // 2 (log+(1/r) + 1 + sqrt(3 t)), d = 3
// (1 + A) log+(2/r) + A/d with A = (d/(2 pi e))^{d/2} |S^{d-1}| / d.
double log_plus_envelope(int dim, double r);

struct KernelBoundRow {
  std::string check;  // "inverse_power", "bessel", "inverse_square", "log_plus"
  int dim = 3;
  double r = 0.0;
  double t = 0.0;
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

struct KernelBoundGrid {
  std::vector<int> dims{2, 3};
  std::vector<double> radii{0.01, 0.05, 0.2, 0.5, 1.0};
  std::vector<double> times{0.01, 0.1, 0.5, 1.0, 4.0};
  std::vector<double> alphas{0.5, 1.0, 1.5};
};

struct KernelBoundReport {
  std::vector<KernelBoundRow> rows;
  // Empirical sup over the grid of |x|^alpha int p_t |y - x|^{-alpha}, per (dim, alpha).
  struct EmpiricalConstant {
    int dim;
    double alpha;
    double value;
  };
  std::vector<EmpiricalConstant> empirical_inverse_power;
  // int_0^1 E|B_s|^{-1} ds in d = 3 (x = 0), and its envelope sqrt(3).
  double bessel_origin = 0.0;
  double bessel_origin_envelope = 0.0;
  bool all_hold() const;
  std::size_t failures() const;
};

KernelBoundReport verify_kernel_bounds(const KernelBoundGrid& grid = {}, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// d=2 resolvent kernel minus its log singularity:
//   f_alpha(r) = int_0^inf e^{-alpha s} p_s(r) ds - (1/pi) log+(1/r)
//              = K_0(sqrt(2 alpha) r)/pi - (1/pi) log+(1/r),
// extended at r = 0 by its limit.
double f_alpha(double alpha, double r);
double f_alpha_limit(double alpha);  // (1/pi)((1/2) log(2/alpha) - gamma)

// The limit assembled piece by piece from the splitting of the s-integral at
// s = 1, each piece by quadrature.
struct FAlphaDecomposition {
  double i2 = 0.0;  // int_0^1 (e^{-alpha s} - 1) / (2 pi s) ds
  double i3 = 0.0;  // int_1^inf e^{-alpha s} / (2 pi s) ds
  double j1 = 0.0;  // (1/(2 pi)) log 2
  double j2 = 0.0;  // int_0^1 (e^{-s} - 1) / (2 pi s) ds
  double j3 = 0.0;  // int_1^inf e^{-s} / (2 pi s) ds
  double total() const { return i2 + i3 + j1 + j2 + j3; }
};
FAlphaDecomposition f_alpha_decomposition(double alpha);

}  // namespace sbm
