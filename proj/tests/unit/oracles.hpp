#pragma once

// Test-side oracles: plain composite rules and a tiny generator, written
// without the library's quadrature so they give an independent route.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Composite Simpson with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// int_0^t g(s) ds for g with an integrable endpoint singularity or steep
// layer at 0: s = t u^2. The u = 0 value is taken as the limit from a tiny u
// (nonzero when g ~ s^{-1/2}).
template <class F>
double simpson_sqrt(F&& g, double t, int n = 4000) {
  return simpson([&](double u) { u = std::max(u, 1e-100); return g(t * u * u) * 2.0 * t * u; }, 0.0, 1.0, n);
}

inline double heat3(double t, double r) { return std::pow(2.0 * pi * t, -1.5) * std::exp(-r * r / (2.0 * t)); }
inline double heat2(double t, double r) { return std::exp(-r * r / (2.0 * t)) / (2.0 * pi * t); }

// Density of |a + B_t| in d = 3.
inline double radial3(double t, double a, double rho) {
  if (a == 0.0) return 4.0 * pi * rho * rho * heat3(t, rho);
  return rho / (a * std::sqrt(2.0 * pi * t)) *
         (std::exp(-(a - rho) * (a - rho) / (2.0 * t)) - std::exp(-(a + rho) * (a + rho) / (2.0 * t)));
}

// E1 by its power series (fine for x <= 2).
inline double e1_series(double x) {
  double s = -std::numbers::egamma - std::log(x);
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    s -= term / k;
  }
  return s;
}

// Exact binomial coefficient for small arguments.
inline std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// splitmix64 stream for property tests.
struct Gen {
  std::uint64_t s;
  explicit Gen(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  // Box-Muller
  double normal() {
    const double u1 = uniform(1e-300, 1.0), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }
  std::vector<double> normals(std::size_t n, double mean = 0.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = mean + normal();
    return v;
  }
};

}  // namespace oracle
