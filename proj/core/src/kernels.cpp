#include "sbm/kernels.hpp"

#include <cmath>
#include <sstream>

#include "sbm/cutoff.hpp"

namespace sbm {

using constants::pi;

double heat_kernel_radial(int dim, double t, double r) {
  require_dim(dim);
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  return std::pow(2.0 * pi * t, -0.5 * dim) * std::exp(-r * r / (2.0 * t));
}

double heat_kernel(int dim, double t, const SpacePoint& x) { return heat_kernel_radial(dim, t, norm(x, dim)); }

ExtendedReal potential_q_radial(int dim, TimeHorizon t, double r) {
  require_dim(dim);
  if (r < 0.0) throw DomainError("negative radius");
  if (!t.infinite) {
    if (t.t < 0.0) throw DomainError("potential needs t >= 0");
    if (t.t == 0.0) return 0.0;
  }
  if (r == 0.0) return ExtendedReal::infinity();
  if (dim == 3) {
    if (t.infinite) return constants::green3 / r;
    return std::erfc(r / std::sqrt(2.0 * t.t)) * constants::green3 / r;
  }
  if (t.infinite) return ExtendedReal::infinity();
  return special::expint_e1(r * r / (2.0 * t.t)) / (2.0 * pi);
}

ExtendedReal potential_q(int dim, TimeHorizon t, const SpacePoint& x) {
  return potential_q_radial(dim, t, norm(x, dim));
}

double potential_q_by_quadrature(int dim, double t, double r, const QuadratureSpec& spec) {
  require_dim(dim);
  if (!(t > 0.0) || !(r > 0.0)) throw DomainError("quadrature potential needs t > 0 and r > 0");
  auto f = [&](double s) { return heat_kernel_radial(dim, s, r); };
  // the integrand is negligible below s = r^2 / 1500 (exponent < -750)
  std::vector<double> b{r * r / 1500.0};
  for (double k : {200.0, 40.0, 8.0, 2.0, 1.0, 0.5}) {
    const double s = r * r / k;
    if (s > b.back() && s < t) b.push_back(s);
  }
  for (double s = b.back() * 10.0; s < t; s *= 10.0) b.push_back(s);
  if (t > b.back()) b.push_back(t);
  std::sort(b.begin(), b.end());
  QuadratureSpec q = spec;
  q.log_spaced = true;
  return integrate_panels(f, b, q).value;
}

namespace {
// erf(z)/z, with the series near 0.
double erf_over(double z) {
  if (std::abs(z) < 1e-5) return 2.0 / std::sqrt(pi) * (1.0 - z * z / 3.0);
  return std::erf(z) / z;
}

// E1(u) + log u, continuous at u = 0.
double e1_plus_log(double u) {
  if (u < 1e-3) {
    double term = -1.0;
    double sum = -constants::euler_gamma;
    for (int k = 1; k < 12; ++k) {
      term *= -u / k;
      sum -= term / k;
    }
    return sum;
  }
  return special::expint_e1(u) + std::log(u);
}
}  // namespace

double potential_q_regular3(double t, double r) {
  if (!(t > 0.0) || r < 0.0) throw DomainError("regular potential needs t > 0, r >= 0");
  const double s = std::sqrt(2.0 * t);
  return -constants::green3 * erf_over(r / s) / s;
}

double potential_q_regular2(double t, double r) {
  if (!(t > 0.0) || r < 0.0) throw DomainError("regular potential needs t > 0, r >= 0");
  if (r >= 1.0) return special::expint_e1(r * r / (2.0 * t)) / (2.0 * pi);
  const double u = r * r / (2.0 * t);
  return (e1_plus_log(u) + std::log(2.0 * t)) / (2.0 * pi);
}

double radial_density(int dim, double t, double a, double rho) {
  if (rho <= 0.0) return 0.0;
  if (dim == 3) {
    const double g = 1.0 / std::sqrt(2.0 * pi * t);
    if (a == 0.0) return g * 2.0 * rho * rho / t * std::exp(-rho * rho / (2.0 * t));
    const double d = a - rho;
    return g * (rho / a) * std::exp(-d * d / (2.0 * t)) * (-std::expm1(-2.0 * a * rho / t));
  }
  const double d = a - rho;
  return (rho / t) * std::exp(-d * d / (2.0 * t)) * special::bessel_i0e(a * rho / t);
}

double radial_density_integrated3(double t, double a, double rho) {
  if (rho <= 0.0 || !(t > 0.0)) return 0.0;
  const double scale = rho + std::sqrt(t);
  if (a < 1e-7 * scale) return 2.0 * rho * std::erfc(rho / std::sqrt(2.0 * t));
  return (rho / a) * (special::gauss_time_integral(a - rho, t) - special::gauss_time_integral(a + rho, t));
}

double smoothed_q(int dim, double t, double eps, double r) {
  require_dim(dim);
  if (!(t > 0.0) || !(eps > 0.0)) throw DomainError("smoothed_q needs t, eps > 0");
  if (r < 1e-12) {
    if (dim == 3) return 2.0 * std::pow(2.0 * pi, -1.5) * (1.0 / std::sqrt(eps) - 1.0 / std::sqrt(t + eps));
    return std::log((t + eps) / eps) / (2.0 * pi);
  }
  return potential_q_radial(dim, TimeHorizon::finite(t + eps), r).value() -
         potential_q_radial(dim, TimeHorizon::finite(eps), r).value();
}

double smoothed_q_by_quadrature(int dim, double t, double eps, double r, const QuadratureSpec& spec) {
  const double se = std::sqrt(eps);
  const double extra[] = {se, 2.0 * se, 4.0 * se, 8.0 * se};
  auto f = [&](double rho) { return heat_kernel_radial(dim, eps, rho); };
  return occupation_radial(dim, t, r, f, spec, extra).value;
}

double smoothed_inverse3(double eps, double r) {
  if (!(eps > 0.0)) throw DomainError("smoothing parameter must be positive");
  const double s = std::sqrt(2.0 * eps);
  return erf_over(r / s) / s;
}

double smoothed_log2(double eps, double r) {
  if (!(eps > 0.0)) throw DomainError("smoothing parameter must be positive");
  const double u = r * r / (2.0 * eps);
  if (u > 700.0) return std::log(r);
  return 0.5 * (std::log(2.0 * eps) + e1_plus_log(u));
}

// ---------------------------------------------------------------------------

bool KernelDescriptor::singular() const {
  switch (tag) {
    case KernelTag::Phi:
    case KernelTag::Inv:
    case KernelTag::InvSq:
    case KernelTag::LogK:
    case KernelTag::LogPlus:
    case KernelTag::GBar:
      return true;
    default:
      return false;
  }
}

double KernelDescriptor::radial(double r) const {
  const double rf = std::max(r, kSingularityFloor);
  double v = 0.0;
  switch (tag) {
    case KernelTag::Heat:
    case KernelTag::Mollified:
      v = std::pow(2.0 * pi * param, -0.5 * dim) * std::exp(-r * r / (2.0 * param));
      break;
    case KernelTag::Phi: v = constants::green3 / rf; break;
    case KernelTag::Inv: v = 1.0 / rf; break;
    case KernelTag::InvSq: v = 1.0 / (rf * rf); break;
    case KernelTag::LogK: v = std::log(rf); break;
    case KernelTag::LogPlus: v = log_plus(1.0 / rf); break;
    case KernelTag::GBar: v = r >= 1.0 ? 0.0 : std::log(rf) * chi_half(rf); break;
    case KernelTag::PhiSmooth: v = constants::green3 * smoothed_inverse3(param, r); break;
    case KernelTag::LogKSmooth: v = smoothed_log2(param, r); break;
    case KernelTag::Const: v = param; break;
  }
  return scale * v;
}

std::string KernelDescriptor::name() const {
  std::ostringstream os;
  os.precision(6);
  switch (tag) {
    case KernelTag::Heat: os << "HEAT"; break;
    case KernelTag::Mollified: os << "MOLLIFIED"; break;
    case KernelTag::Phi: os << "PHI"; break;
    case KernelTag::Inv: os << "INV"; break;
    case KernelTag::InvSq: os << "INVSQ"; break;
    case KernelTag::LogK: os << "LOGK"; break;
    case KernelTag::LogPlus: os << "LOGPLUS"; break;
    case KernelTag::GBar: os << "GBAR"; break;
    case KernelTag::PhiSmooth: os << "PHI_SMOOTH"; break;
    case KernelTag::LogKSmooth: os << "LOGK_SMOOTH"; break;
    case KernelTag::Const: os << "CONST"; break;
  }
  os << "(d=" << dim;
  if (spatial()) os << ",x=(" << center[0] << "," << center[1] << "," << center[2] << ")";
  switch (tag) {
    case KernelTag::Heat: os << ",t=" << param; break;
    case KernelTag::Mollified:
    case KernelTag::PhiSmooth:
    case KernelTag::LogKSmooth: os << ",eps=" << param; break;
    case KernelTag::Const: os << ",a=" << param; break;
    default: break;
  }
  if (scale != 1.0) os << ",scale=" << scale;
  os << ")";
  return os.str();
}

namespace kernel {
namespace {
KernelDescriptor make(KernelTag tag, int dim, const SpacePoint& x, double param) {
  require_dim(dim);
  return KernelDescriptor{tag, dim, x, param, 1.0};
}
void positive(double v, const char* what) {
  if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}
}  // namespace

KernelDescriptor heat(int dim, double t, const SpacePoint& x) {
  positive(t, "heat kernel time");
  return make(KernelTag::Heat, dim, x, t);
}
KernelDescriptor mollified(int dim, const SpacePoint& x, double eps) {
  positive(eps, "mollifier bandwidth");
  return make(KernelTag::Mollified, dim, x, eps);
}
KernelDescriptor phi(const SpacePoint& x) { return make(KernelTag::Phi, 3, x, 0.0); }
KernelDescriptor inv(int dim, const SpacePoint& x) { return make(KernelTag::Inv, dim, x, 0.0); }
KernelDescriptor inv_sq(int dim, const SpacePoint& x) { return make(KernelTag::InvSq, dim, x, 0.0); }
KernelDescriptor log_k(int dim, const SpacePoint& x) { return make(KernelTag::LogK, dim, x, 0.0); }
KernelDescriptor log_plus(int dim, const SpacePoint& x) { return make(KernelTag::LogPlus, dim, x, 0.0); }
KernelDescriptor gbar(const SpacePoint& x) { return make(KernelTag::GBar, 3, x, 0.0); }
KernelDescriptor phi_smooth(const SpacePoint& x, double eps) {
  positive(eps, "smoothing bandwidth");
  return make(KernelTag::PhiSmooth, 3, x, eps);
}
KernelDescriptor log_k_smooth(const SpacePoint& x, double eps) {
  positive(eps, "smoothing bandwidth");
  return make(KernelTag::LogKSmooth, 2, x, eps);
}
KernelDescriptor constant(int dim, double value) { return make(KernelTag::Const, dim, SpacePoint{}, value); }
}  // namespace kernel

}  // namespace sbm
