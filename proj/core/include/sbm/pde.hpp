#pragma once

#include <span>
#include <vector>

namespace sbm {

// Outer closure at r_max. Neumann is W'(r_max) = 0. PowerLaw imposes the
// large-r behaviour V ~ 2/r^2 of the source-free equation, i.e. W' = -W/r.
enum class FarField { Neumann, PowerLaw };

struct RadialSolveOptions {
  FarField far_field = FarField::Neumann;
  double tolerance = 1e-12;  // on the scaled residual, see RadialSolution
  int max_iterations = 100;
  int max_halvings = 30;
};

// Positive radial solution of (1/2) Delta V = (1/2) V^2 - lambda delta_0 in
// d=3, through W = r V which satisfies W'' = W^2 / r with W(0+) = lambda/(2 pi).
struct RadialSolution {
  double lambda = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  FarField far_field = FarField::Neumann;
  std::vector<double> r;
  std::vector<double> V;
  std::vector<double> W;
  // max_i |F_i| h^2 / max|W| for the finite-difference residual F in u = log r
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_trace;

  // Cubic interpolation of W in log r; V = W / r.
  double W_at(double rr) const;
  double V_at(double rr) const { return W_at(rr) / rr; }
};

RadialSolution solve_radial(double lambda, double r_min, double r_max, int M, const RadialSolveOptions& options = {});

// (V(r) - lambda/(2 pi r)) / (lambda^2 log(1/r) / (4 pi^2)); tends to -1 as r -> 0.
double second_order_ratio(const RadialSolution& s, double r);

struct RatioPoint {
  double r = 0.0;
  double ratio = 0.0;
};
// Ratio at `per_decade` log-spaced radii on [10 r_min, 1e-2].
std::vector<RatioPoint> second_order_ratios(const RadialSolution& s, int per_decade = 4);

// -log of the mean of exp(-lambda L) with a delta-method standard error.
struct LaplaceEstimate {
  double value = 0.0;
  double se = 0.0;
};
LaplaceEstimate laplace_exponent(std::span<const double> local_times, double lambda);

}  // namespace sbm
