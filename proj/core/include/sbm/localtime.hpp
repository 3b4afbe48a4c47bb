#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sbm/kernels.hpp"
#include "sbm/measure.hpp"
#include "sbm/particles.hpp"

namespace sbm {

// L_t^x estimated by int_0^t X_s(p_eps(. - x)) ds.
struct LocalTimeEstimate {
  SpacePoint x{};
  double t = 0.0;
  bool to_extinction = false;
  double eps = 0.0;
  double value = 0.0;
  std::uint64_t replicate = 0;
};

// max(0.5 N^{-1/(d+2)}, 2 sqrt(dt)), used when a config leaves eps unset.
double default_bandwidth(int dim, std::size_t particles_per_unit_mass, double dt);

// Reads the MOLLIFIED(x, eps) trace at the recorded time closest to t
// (final time when t is empty).
LocalTimeEstimate estimate_local_time(const PathRecord& path, const SpacePoint& x, double eps,
                                      std::optional<double> t = std::nullopt);

// Exact mean of the estimator started from mu: sum m_i (q_{t+eps} - q_eps)(y_i - x).
// For the infinite horizon in d=3 this is sum m_i P_eps(phi_x)(y_i).
double local_time_mean(const AtomicMeasure& mu, TimeHorizon t, double eps, const SpacePoint& x);

// psi(x) = sqrt(2 c^2 log(1/|x|)) with c = 1/(2 pi); needs 0 < |x| < 1.
double renorm_psi(double r);
// (L - 1/(2 pi |x|)) / psi(x)
double renorm_stat_d3(double local_time, double r);
// L - (1/pi) log(1/|x|)
double renorm_stat_d2(double local_time, double r);

// Kernels a path needs for tanaka_decompose at (x, eps).
std::vector<KernelDescriptor> tanaka_kernels(int dim, const SpacePoint& x, double eps);

// Smoothed Tanaka identity at bandwidth eps. With F = P_eps phi_x (d=3) or
// F = P_eps g_x (d=2) one has (1/2) Delta F = -p_eps^x resp. pi p_eps^x, so
//   d=3: M = L + X_t(F) - mu(F)
//   d=2: M = X_t(F) - pi L - mu(F)
// is an honest martingale at every eps.
struct TanakaDecomposition {
  int dim = 3;
  SpacePoint x{};
  double t = 0.0;
  double eps = 0.0;
  double local_time = 0.0;
  double terminal = 0.0;  // X_t(F)
  double initial = 0.0;   // mu(F)
  double martingale = 0.0;
  // d=3: (L - mu(phi_x)) / psi(x); d=2: L - (1/pi) log(1/|x|) (delta_0 only).
  double statistic = 0.0;
  // d=3 only, when INVSQ and LOGK are registered:
  std::optional<double> quadratic_variation;  // c^2 int_0^t X_s(|y-x|^-2) ds
  std::optional<double> qv_ratio;             // qv / (2 c^2 log(1/|x|))
  std::optional<double> half_inv_sq;          // (1/2) int_0^t X_s(|y-x|^-2) ds
  std::optional<double> log_terminal;         // X_t(g_x)
  std::uint64_t singular_hits = 0;
};

TanakaDecomposition tanaka_decompose(const PathRecord& path, const AtomicMeasure& mu, const SpacePoint& x,
                                     double eps, std::optional<double> t = std::nullopt);

// Per-path sequence |x_n|^alpha |L_n - c/|x_n|| for a decreasing radius list.
std::vector<double> rate_sequence(const std::vector<double>& local_times, const std::vector<double>& radii,
                                  double alpha);

struct BadPointNormalizers {
  double newtonian = 0.0;  // mu(phi_x)
  double log_plus = 0.0;   // sum m_i log+(1/|y_i - x|)
};
BadPointNormalizers bad_point_normalizers(const AtomicMeasure& mu, const SpacePoint& x);
// (L - mu(phi_x)) / sqrt(2 c^2 Lambda)
double bad_point_statistic(double local_time, const BadPointNormalizers& n);

}  // namespace sbm
