#include "sbm/kernel_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sbm/kernels.hpp"
#include "sbm/space.hpp"
#include "sbm/special.hpp"

namespace sbm {

using constants::pi;

double MeanIdentityReport::max_abs_residual() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, std::abs(c.residual()));
  return m;
}

MeanIdentityReport verify_mean_identities(int dim, double t, double r, const QuadratureSpec& spec) {
  require_dim(dim);
  if (!(t > 0.0) || !(r > 0.0)) throw DomainError("mean identities need t > 0 and |x| > 0");
  MeanIdentityReport rep{dim, t, r, {}};
  auto log_rho = [](double rho) { return std::log(rho); };
  if (dim == 3) {
    auto inv_sq = [](double rho) { return 1.0 / (rho * rho); };
    auto inv = [](double rho) { return 1.0 / rho; };
    const double occ = occupation_radial(3, t, r, inv_sq, spec).value;
    const double elog = expect_radial(3, t, r, log_rho, spec).value;
    rep.checks.push_back({"inverse_square_vs_log", 0.5 * occ, elog - std::log(r)});
    const double q = potential_q_radial(3, TimeHorizon::finite(t), r).value();
    const double einv = expect_radial(3, t, r, inv, spec).value;
    rep.checks.push_back({"potential_vs_green", q, constants::green3 / r - constants::green3 * einv});
  } else {
    const double q = potential_q_radial(2, TimeHorizon::finite(t), r).value();
    const double elog = expect_radial(2, t, r, log_rho, spec).value;
    rep.checks.push_back({"potential_vs_log", q - constants::green2 * std::log(1.0 / r), constants::green2 * elog});
  }
  return rep;
}

double heat_sup_constant(int dim) {
  require_dim(dim);
  return std::pow(dim / (2.0 * pi * std::exp(1.0)), 0.5 * dim);
}

double inverse_power_constant(double alpha, int dim) {
  if (!(alpha > 0.0) || !(alpha < dim)) throw DomainError("need 0 < alpha < d");
  return std::pow(2.0, alpha) * (1.0 + heat_sup_constant(dim) * unit_sphere_area(dim) / (dim - alpha));
}

double bessel_envelope(int dim, double t) {
  require_dim(dim);
  return 2.0 * std::sqrt(static_cast<double>(dim)) / (dim - 1.0) * std::sqrt(t);
}

double inverse_square_envelope(double r, double t) {
  return 2.0 * (log_plus(1.0 / r) + 1.0 + std::sqrt(3.0) * std::sqrt(t));
}

double log_plus_envelope(int dim, double r) {
  const double a = heat_sup_constant(dim) * unit_sphere_area(dim) / dim;
  return (1.0 + a) * log_plus(2.0 / r) + a / dim;
}

bool KernelBoundReport::all_hold() const {
  return failures() == 0 && bessel_origin <= bessel_origin_envelope;
}

std::size_t KernelBoundReport::failures() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.holds(); }));
}

KernelBoundReport verify_kernel_bounds(const KernelBoundGrid& grid, const QuadratureSpec& spec) {
  KernelBoundReport rep;
  std::map<std::pair<int, double>, double> sup;
  for (int d : grid.dims) {
    require_dim(d);
    for (double r : grid.radii) {
      for (double t : grid.times) {
        for (double a : grid.alphas) {
          if (!(a < d)) continue;
          const double lhs = expect_radial(d, t, r, [a](double rho) { return std::pow(rho, -a); }, spec).value;
          rep.rows.push_back({"inverse_power", d, r, t, a, lhs, inverse_power_constant(a, d) * std::pow(r, -a)});
          auto& s = sup[{d, a}];
          s = std::max(s, lhs * std::pow(r, a));
        }
        const double bes = occupation_radial(d, t, r, [](double rho) { return 1.0 / rho; }, spec).value;
        rep.rows.push_back({"bessel", d, r, t, 1.0, bes, bessel_envelope(d, t)});
        if (d == 3) {
          const double isq = occupation_radial(3, t, r, [](double rho) { return 1.0 / (rho * rho); }, spec).value;
          rep.rows.push_back({"inverse_square", 3, r, t, 2.0, isq, inverse_square_envelope(r, t)});
        }
        const double lp = expect_radial(d, t, r, [](double rho) { return log_plus(1.0 / rho); }, spec,
                                        std::vector<double>{1.0})
                              .value;
        rep.rows.push_back({"log_plus", d, r, t, 0.0, lp, log_plus_envelope(d, r)});
      }
    }
  }
  for (const auto& [key, v] : sup) rep.empirical_inverse_power.push_back({key.first, key.second, v});
  // x = 0: E|B_s|^{-1} by radial quadrature, then integrated over s in (0, 1]
  auto e_inv = [&](double s) {
    return expect_radial(3, s, 0.0, [](double rho) { return 1.0 / rho; }, spec).value;
  };
  std::vector<double> sb{1e-14};
  for (double s = 1e-12; s < 1.0; s *= 10.0) sb.push_back(s);
  sb.push_back(1.0);
  rep.bessel_origin = integrate_panels(e_inv, sb, spec).value;
  rep.bessel_origin_envelope = bessel_envelope(3, 1.0);
  return rep;
}

// ---------------------------------------------------------------------------

double f_alpha_limit(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("f_alpha needs alpha > 0");
  return (0.5 * std::log(2.0 / alpha) - constants::euler_gamma) / pi;
}

double f_alpha(double alpha, double r) {
  if (!(alpha > 0.0)) throw DomainError("f_alpha needs alpha > 0");
  r = std::abs(r);
  const double z = std::sqrt(2.0 * alpha) * r;
  if (z < 1e-6) {
    // K_0(z) = -log(z/2) - gamma + O(z^2 log z)
    return f_alpha_limit(alpha) + z * z * (1.0 - constants::euler_gamma - std::log(0.5 * z)) / (4.0 * pi);
  }
  return special::bessel_k0(z) / pi - log_plus(1.0 / r) / pi;
}

FAlphaDecomposition f_alpha_decomposition(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("f_alpha needs alpha > 0");
  QuadratureSpec spec;
  spec.log_spaced = false;
  auto damped = [](double a) {
    return [a](double s) { return s == 0.0 ? -a / (2.0 * pi) : std::expm1(-a * s) / (2.0 * pi * s); };
  };
  FAlphaDecomposition out;
  out.i2 = integrate(damped(alpha), 0.0, 1.0, spec).value;
  out.j2 = integrate(damped(1.0), 0.0, 1.0, spec).value;
  // tails on [1, inf) via s = 1/u, u in (0, 1]
  auto tail = [](double a) {
    return [a](double u) { return u == 0.0 ? 0.0 : std::exp(-a / u) / (2.0 * pi * u); };
  };
  out.i3 = integrate(tail(alpha), 0.0, 1.0, spec).value;
  out.j3 = integrate(tail(1.0), 0.0, 1.0, spec).value;
  out.j1 = std::log(2.0) / (2.0 * pi);
  return out;
}

}  // namespace sbm
