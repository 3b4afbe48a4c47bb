#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbm/extended.hpp"
#include "sbm/kernels.hpp"
#include "sbm/measure.hpp"

namespace sbm {

// c_1 = 1, c_n = sum_{k=1}^{n-1} c_k c_{n-k}. Exact for n <= 37; larger n overflows 64 bits and throws.
std::uint64_t catalan_c(int n);

// F(theta) = 1/2 - sqrt(1/4 - theta), the solution of F - theta = F^2.
double gen_function_F(double theta);
// sum_{n <= n_max} c_n theta^n
double gen_function_partial(double theta, int n_max);

struct CumulantOptions {
  int time_steps = 256;
  int radial_nodes = 128;
  double r_max = 0.0;          // 0 picks max(probes) + 12 sqrt(t) + 1
  std::vector<double> probes;  // radii inserted into the grid as exact nodes
  // v_1 quadrature; the radial grid limits accuracy to ~1e-4 anyway
  QuadratureSpec spec{.nodes = 20, .log_spaced = true, .r_min = 1e-10, .truncation_sigmas = 12.0,
                      .abs_tol = 1e-12, .rel_tol = 1e-9, .max_depth = 48};
};

// v_n(s, r) for s on a uniform grid of [0, t] and r the distance to the kernel
// centre, n = 1..n_max.
//   v_1(t) = int_0^t P_s phi ds
//   v_n(t) = sum_{k=1}^{n-1} int_0^t P_{t-s}(v_k(s) v_{n-k}(s)) ds
class CumulantTable {
 public:
  const KernelDescriptor& kernel() const { return kernel_; }
  double horizon() const { return t_; }
  int n_max() const { return n_max_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& times() const { return times_; }

  // Values at the final time, or at time index j.
  const std::vector<double>& at_horizon(int n) const { return history(n).back(); }
  const std::vector<std::vector<double>>& history(int n) const;

  // Linear interpolation in r at the final time.
  double value(int n, double r) const;
  // mu(v_n(t)) for a measure in the same coordinates as the kernel centre.
  double pair(int n, const AtomicMeasure& mu) const;

 private:
  friend CumulantTable v_recursion(const KernelDescriptor&, double, int, const CumulantOptions&);
  KernelDescriptor kernel_;
  double t_ = 0.0;
  int n_max_ = 0;
  std::vector<double> radii_;
  std::vector<double> times_;
  std::vector<std::vector<std::vector<double>>> v_;  // [n-1][time][radius]
};

CumulantTable v_recursion(const KernelDescriptor& phi, double t, int n_max, const CumulantOptions& options = {});

// kappa_n = 2 n! mu(v_n) / 2^n; kappa_1 is the mean, kappa_2 the variance.
double cumulants_kappa(const CumulantTable& table, const AtomicMeasure& mu, int n);
// Central moments 2..4 from cumulants kappa_1..kappa_4 (index 0 unused).
std::vector<double> central_moments_from_cumulants(std::span<const double> kappa);

// v_n(t, r) <= c_n K^n t^{(3n-2)/2} on every grid radius.
struct GrowthBoundCheck {
  int n = 0;
  double worst_ratio = 0.0;  // max over r of v_n / bound
  bool holds = false;
};
std::vector<GrowthBoundCheck> check_growth_bound(const CumulantTable& table, double envelope_constant);

// Relative change of v_2(t, probe) when the time grid is doubled.
double time_refinement_change(const KernelDescriptor& phi, double t, double probe, CumulantOptions options = {});

// E exp(X_t(f)) <= exp{P_t f(start) / (1 - G/2)} when G = int_0^t sup P_s f ds < 2.
// f must be radially nonincreasing about its centre so the sup sits there.
struct ExpMomentBound {
  double G = 0.0;
  double mean_term = 0.0;  // P_t f(start)
  ExtendedReal bound;      // infinity() when G >= 2
  bool diverges = false;
};
ExpMomentBound exp_moment_bound(const KernelDescriptor& f, double t, const SpacePoint& start = {});

struct MomentComparison {
  int order = 0;  // 1 = mean, k >= 2 central moment
  double empirical = 0.0;
  double se = 0.0;
  double predicted = 0.0;
  double z = 0.0;
};
// Sample moments of occupation integrals against cumulant predictions. SEs of
// third and fourth central moments come from a seeded bootstrap.
std::vector<MomentComparison> mc_crosscheck_moments(std::span<const double> samples, std::span<const double> kappa,
                                                    int max_order, std::uint64_t seed = 0,
                                                    int bootstrap_resamples = 1000);

}  // namespace sbm
