#include "sbm/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "sbm/space.hpp"

namespace sbm {

GaussLegendre::GaussLegendre(int n) {
  if (n < 2 || n > 256) throw DomainError("Gauss-Legendre order must be in [2, 256]");
  nodes_.resize(static_cast<std::size_t>(n));
  weights_.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p1 = 1.0;
    double p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    dp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes_[static_cast<std::size_t>(i)] = -z;
    nodes_[static_cast<std::size_t>(n - 1 - i)] = z;
    weights_[static_cast<std::size_t>(i)] = w;
    weights_[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

const GaussLegendre& GaussLegendre::get(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(n);
  return *slot;
}

void QuadratureSpec::validate() const {
  if (nodes < 16) throw DomainError("quadrature needs at least 16 nodes per panel");
  if (!(r_min > 0.0)) throw DomainError("quadrature r_min must be positive");
  if (!(truncation_sigmas >= 6.0)) throw DomainError("truncation must be at least 6 sigma");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
}

std::vector<double> radial_breakpoints(double center, double sigma, const QuadratureSpec& spec,
                                       std::span<const double> extra) {
  const double r_max = center + spec.truncation_sigmas * sigma;
  // In log mode the innermost panel starts at 1e-30 instead of 0, which
  // captures integrable rho^{-alpha} mass below r_min.
  std::vector<double> b{spec.log_spaced ? 1e-30 : 0.0, spec.r_min, r_max};
  if (spec.log_spaced) {
    for (double r = spec.r_min * 10.0; r < r_max; r *= 10.0) b.push_back(r);
  }
  for (double k : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
    const double r = center + k * sigma;
    if (r > spec.r_min && r < r_max) b.push_back(r);
  }
  for (double r : extra) {
    if (r > spec.r_min && r < r_max) b.push_back(r);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace sbm
