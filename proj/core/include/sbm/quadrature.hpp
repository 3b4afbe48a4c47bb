#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sbm/errors.hpp"

namespace sbm {

// Gauss-Legendre rule on [-1, 1]. Nodes come from Newton iteration on P_n.
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  // Cached rules for the node counts used across the library.
  static const GaussLegendre& get(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  template <class F>
  double apply(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(mid + half * nodes_[i]);
    return s * half;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct QuadratureSpec {
  int nodes = 20;
  bool log_spaced = true;
  double r_min = 1e-10;
  // Radial truncation at (center distance) + truncation_sigmas * sqrt(t).
  double truncation_sigmas = 12.0;
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_depth = 48;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

template <class F>
double adapt(F& f, const GaussLegendre& rule, double a, double b, double whole, double abs_tol,
             double rel_tol, int depth, QuadratureResult& acc) {
  const double m = 0.5 * (a + b);
  const double left = rule.apply(f, a, m);
  const double right = rule.apply(f, m, b);
  acc.evaluations += 2L * rule.size();
  const double halves = left + right;
  const double diff = std::abs(halves - whole);
  if (diff <= std::max(abs_tol, rel_tol * std::abs(halves)) || !std::isfinite(halves)) {
    acc.error += diff;
    return halves;
  }
  if (depth <= 0) {
    throw ToleranceError("adaptive Gauss-Legendre did not converge on [" + std::to_string(a) +
                         ", " + std::to_string(b) + "]");
  }
  return adapt(f, rule, a, m, left, 0.5 * abs_tol, rel_tol, depth - 1, acc) +
         adapt(f, rule, m, b, right, 0.5 * abs_tol, rel_tol, depth - 1, acc);
}

}  // namespace detail

// Adaptive bisection on [a, b]; compares the n-point rule on a panel to the
// sum over its two halves.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  QuadratureResult acc;
  if (a == b) return acc;
  const auto& rule = GaussLegendre::get(spec.nodes);
  const double whole = rule.apply(f, a, b);
  acc.evaluations += rule.size();
  acc.value = detail::adapt(f, rule, a, b, whole, spec.abs_tol, spec.rel_tol, spec.max_depth, acc);
  return acc;
}

// Same, in the variable u = log r. Suited to integrands with power or log
// behaviour at r -> 0. Requires 0 < a < b.
template <class F>
QuadratureResult integrate_log(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (!(a > 0.0) || !(b > a)) throw DomainError("integrate_log needs 0 < a < b");
  auto g = [&f](double u) {
    const double r = std::exp(u);
    return f(r) * r;
  };
  return integrate(g, std::log(a), std::log(b), spec);
}

// Integrate over consecutive panels given by sorted breakpoints. When
// spec.log_spaced is set, panels spanning a wide ratio b/a use the log
// variable; narrow panels (around a peak away from 0) stay linear, where the
// log map would cost precision in (rho - center).
template <class F>
QuadratureResult integrate_panels(F&& f, std::span<const double> breaks, const QuadratureSpec& spec) {
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (!(b > a)) continue;
    const bool use_log = spec.log_spaced && a > 0.0 && b > 4.0 * a;
    QuadratureResult r = use_log ? integrate_log(f, a, b, spec) : integrate(f, a, b, spec);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  }
  return total;
}

// Breakpoints for a radial integral whose weight is concentrated near
// rho = center with width sigma: log-spaced decades from r_min, plus
// center +- k sigma, up to center + truncation_sigmas * sigma.
std::vector<double> radial_breakpoints(double center, double sigma, const QuadratureSpec& spec,
                                       std::span<const double> extra = {});

}  // namespace sbm
