#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sbm/extended.hpp"
#include "sbm/quadrature.hpp"
#include "sbm/space.hpp"
#include "sbm/special.hpp"

namespace sbm {

// Gaussian transition density p_t(x) = (2 pi t)^{-d/2} exp(-|x|^2 / 2t).
double heat_kernel(int dim, double t, const SpacePoint& x);
double heat_kernel_radial(int dim, double t, double r);

// q_t(x) = int_0^t p_s(x) ds. Infinite at x = 0 (t > 0) and for d = 2, t = inf.
ExtendedReal potential_q(int dim, TimeHorizon t, const SpacePoint& x);
ExtendedReal potential_q_radial(int dim, TimeHorizon t, double r);

// Same integral by log-variable quadrature in s; used as a second route.
double potential_q_by_quadrature(int dim, double t, double r, const QuadratureSpec& spec = {});

// Regularised potentials with finite limits at r = 0:
//   d=3: q_t(r) - 1/(2 pi r) = -int_t^inf p_s(r) ds
//   d=2: q_t(r) - (1/pi) log+(1/r)
double potential_q_regular3(double t, double r);
double potential_q_regular2(double t, double r);

// Density in rho of |B_t - x| with B_t ~ p_t and a = |x|.
//   d=3: (2 pi t)^{-1/2} (rho/a) [e^{-(a-rho)^2/2t} - e^{-(a+rho)^2/2t}]
//   d=2: (rho/t) e^{-(a-rho)^2/2t} I0e(a rho / t)
double radial_density(int dim, double t, double a, double rho);

// int_0^t radial_density(dim, s, a, rho) ds. Closed form in d=3 only.
double radial_density_integrated3(double t, double a, double rho);

// E f(|B_t - x|) with a = |x|, for a radial function f.
template <class F>
QuadratureResult expect_radial(int dim, double t, double a, F&& f, const QuadratureSpec& spec = {},
                               std::span<const double> extra_breaks = {}) {
  require_dim(dim);
  if (!(t > 0.0)) throw DomainError("expect_radial needs t > 0");
  spec.validate();
  const auto breaks = radial_breakpoints(a, std::sqrt(t), spec, extra_breaks);
  auto g = [&](double rho) { return f(rho) * radial_density(dim, t, a, rho); };
  return integrate_panels(g, breaks, spec);
}

// int_0^t E f(|B_s - x|) ds. d=3 uses the closed-form time-integrated density;
// d=2 integrates expect_radial over s in the log variable.
template <class F>
QuadratureResult occupation_radial(int dim, double t, double a, F&& f, const QuadratureSpec& spec = {},
                                   std::span<const double> extra_breaks = {}) {
  require_dim(dim);
  if (!(t > 0.0)) throw DomainError("occupation_radial needs t > 0");
  spec.validate();
  if (dim == 3) {
    const auto breaks = radial_breakpoints(a, std::sqrt(t), spec, extra_breaks);
    auto g = [&](double rho) { return f(rho) * radial_density_integrated3(t, a, rho); };
    return integrate_panels(g, breaks, spec);
  }
  QuadratureResult total;
  auto outer = [&](double s) {
    QuadratureResult r = expect_radial(2, s, a, f, spec, extra_breaks);
    total.evaluations += r.evaluations;
    return r.value;
  };
  // below s_lo the expectation is f(a) to first order
  const double s_lo = 1e-12 * t;
  std::vector<double> sb{s_lo};
  for (double s = 1e-10 * t; s < t; s *= 100.0) sb.push_back(s);
  sb.push_back(t);
  QuadratureResult r = integrate_panels(outer, sb, spec);
  if (a > 0.0) r.value += s_lo * f(a);
  r.evaluations += total.evaluations;
  return r;
}

// E int_0^t X_s(p_eps(. - x)) ds started from delta_0, i.e. q_{t+eps}(x) - q_eps(x).
double smoothed_q(int dim, double t, double eps, double r);
// The same quantity by nested quadrature of int_0^t int p_s(y) p_eps(y - x) dy ds.
double smoothed_q_by_quadrature(int dim, double t, double eps, double r, const QuadratureSpec& spec = {});

// Heat semigroup applied to the Green kernels:
//   d=3: E 1/|a + B_eps| = erf(a / sqrt(2 eps)) / a
//   d=2: E log|a + B_eps| = log a + E1(a^2 / 2 eps) / 2
double smoothed_inverse3(double eps, double r);
double smoothed_log2(double eps, double r);

// ---------------------------------------------------------------------------
// Kernel registry entries evaluated on particle clouds.

enum class KernelTag {
  Heat,        // p_t(y - x), param = t
  Mollified,   // p_eps(y - x), param = eps
  Phi,         // 1/(2 pi |y - x|), d = 3
  Inv,         // 1/|y - x|
  InvSq,       // 1/|y - x|^2
  LogK,        // log|y - x|
  LogPlus,     // log+(1/|y - x|)
  GBar,        // log|y - x| chi_{1/2}(|y - x|), d = 3
  PhiSmooth,   // P_eps applied to Phi, param = eps
  LogKSmooth,  // P_eps applied to LogK, param = eps (d = 2)
  Const,       // constant, param = value
};

// Distances below this floor are clamped for singular kernels.
inline constexpr double kSingularityFloor = 1e-8;

struct KernelDescriptor {
  KernelTag tag = KernelTag::Const;
  int dim = 3;
  SpacePoint center{};
  double param = 1.0;
  double scale = 1.0;

  bool operator==(const KernelDescriptor&) const = default;

  bool spatial() const { return tag != KernelTag::Const; }
  bool singular() const;
  std::string name() const;

  // Value as a function of r = |y - center|. Singular kernels clamp r at
  // kSingularityFloor.
  double radial(double r) const;
  double operator()(const SpacePoint& y) const { return radial(distance(y, center, dim)); }
};

namespace kernel {
KernelDescriptor heat(int dim, double t, const SpacePoint& x = {});
KernelDescriptor mollified(int dim, const SpacePoint& x, double eps);
KernelDescriptor phi(const SpacePoint& x);
KernelDescriptor inv(int dim, const SpacePoint& x);
KernelDescriptor inv_sq(int dim, const SpacePoint& x);
KernelDescriptor log_k(int dim, const SpacePoint& x);
KernelDescriptor log_plus(int dim, const SpacePoint& x);
KernelDescriptor gbar(const SpacePoint& x);
KernelDescriptor phi_smooth(const SpacePoint& x, double eps);
KernelDescriptor log_k_smooth(const SpacePoint& x, double eps);
KernelDescriptor constant(int dim, double value);
}  // namespace kernel

}  // namespace sbm
