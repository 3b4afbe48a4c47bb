#include "sbm/cutoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include "sbm/errors.hpp"
#include "sbm/quadrature.hpp"
#include "sbm/space.hpp"

namespace sbm {

namespace {

using constants::pi;

// 1 / int_{|x|<1} exp(1/(|x|^2 - 1)) dx
double bump_normaliser(int dim) {
  static std::once_flag once;
  static std::array<double, 4> cache{};
  std::call_once(once, [] {
    for (int d : {2, 3}) {
      auto f = [d](double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 / (s * s - 1.0)) * std::pow(s, d - 1); };
      QuadratureSpec spec;
      spec.abs_tol = 1e-16;
      cache[static_cast<std::size_t>(d)] = 1.0 / (unit_sphere_area(d) * integrate(f, 0.0, 1.0, spec).value);
    }
  });
  return cache[static_cast<std::size_t>(dim)];
}

QuadratureSpec fine_spec() {
  QuadratureSpec spec;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-12;
  return spec;
}

}  // namespace

SmoothCutoff::SmoothCutoff(int dim, double ball_radius, double mollifier_radius)
    : dim_(dim), ball_(ball_radius), moll_(mollifier_radius) {
  require_dim(dim);
  if (!(ball_radius > 0.0) || !(mollifier_radius > 0.0)) throw DomainError("cutoff radii must be positive");
  norm_ = bump_normaliser(dim) * std::pow(mollifier_radius, -dim);
}

double SmoothCutoff::bump(double s) const {
  const double z = s / moll_;
  if (z >= 1.0) return 0.0;
  return norm_ * std::exp(1.0 / (z * z - 1.0));
}

double SmoothCutoff::bump_derivative(double s) const {
  const double z = s / moll_;
  if (z >= 1.0) return 0.0;
  const double den = z * z - 1.0;
  return bump(s) * (-2.0 * z / moll_) / (den * den);
}

double SmoothCutoff::value(double r) const {
  r = std::abs(r);
  if (r <= ball_ - moll_) return 1.0;
  if (r >= ball_ + moll_) return 0.0;
  // fraction of the sphere of radius s about x lying inside B(0, R)
  auto fraction = [&](double s) {
    if (r == 0.0 || s == 0.0) return (std::max(r, s) < ball_) ? 1.0 : 0.0;
    const double u = std::clamp((ball_ * ball_ - r * r - s * s) / (2.0 * r * s), -1.0, 1.0);
    return dim_ == 3 ? 0.5 * (1.0 + u) : 1.0 - std::acos(u) / pi;
  };
  const double area = unit_sphere_area(dim_);
  auto f = [&](double s) { return bump(s) * area * std::pow(s, dim_ - 1) * fraction(s); };
  std::vector<double> b{0.0, moll_};
  for (double k : {std::abs(ball_ - r), ball_ + r}) {
    if (k > 0.0 && k < moll_) b.push_back(k);
  }
  std::sort(b.begin(), b.end());
  QuadratureSpec spec = fine_spec();
  spec.log_spaced = false;
  return std::clamp(integrate_panels(f, b, spec).value, 0.0, 1.0);
}

double SmoothCutoff::derivative(double r) const {
  if (dim_ != 3) throw DomainError("cutoff derivative is implemented for d = 3");
  r = std::abs(r);
  if (r <= ball_ - moll_ || r >= ball_ + moll_ || r == 0.0) return 0.0;
  const double lo = std::max(-1.0, (r * r + ball_ * ball_ - moll_ * moll_) / (2.0 * r * ball_));
  auto f = [&](double u) { return bump(std::sqrt(std::max(0.0, r * r + ball_ * ball_ - 2.0 * r * ball_ * u))) * u; };
  return -2.0 * pi * ball_ * ball_ * integrate(f, lo, 1.0, fine_spec()).value;
}

double SmoothCutoff::laplacian(double r) const {
  if (dim_ != 3) throw DomainError("cutoff Laplacian is implemented for d = 3");
  r = std::abs(r);
  if (r <= ball_ - moll_ || r >= ball_ + moll_) return 0.0;
  if (r == 0.0) return 4.0 * pi * ball_ * ball_ * bump_derivative(ball_);
  const double lo = std::max(-1.0, (r * r + ball_ * ball_ - moll_ * moll_) / (2.0 * r * ball_));
  auto f = [&](double u) {
    const double w = std::sqrt(std::max(1e-300, r * r + ball_ * ball_ - 2.0 * r * ball_ * u));
    return bump_derivative(w) * (r * u - ball_) / w;
  };
  return -2.0 * pi * ball_ * ball_ * integrate(f, lo, 1.0, fine_spec()).value;
}

const SmoothCutoff& cutoff_half() {
  static const SmoothCutoff c(3, 0.75, 0.25);
  return c;
}

namespace {
constexpr int kTableSize = 4096;

const std::vector<double>& chi_half_table() {
  static const std::vector<double> table = [] {
    std::vector<double> v(kTableSize);
    const auto& c = cutoff_half();
    for (int i = 0; i < kTableSize; ++i) v[static_cast<std::size_t>(i)] = c.value(0.5 + 0.5 * i / (kTableSize - 1.0));
    return v;
  }();
  return table;
}
}  // namespace

double chi_half(double r) {
  r = std::abs(r);
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const auto& tab = chi_half_table();
  const double pos = (r - 0.5) / 0.5 * (kTableSize - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(kTableSize - 2));
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * tab[i] + w * tab[i + 1];
}

double cutoff_chi(int dim, double big_n, double r) {
  return SmoothCutoff(dim, big_n, 1.0).value(r);
}

GBarComponents gbar_components(double r) {
  GBarComponents out;
  r = std::abs(r);
  if (r == 0.0) {
    out.singular = true;
    return out;
  }
  if (r >= 1.0) {
    out.h = -1.0 / (r * r);
    return out;
  }
  const auto& c = cutoff_half();
  const double chi = r <= 0.5 ? 1.0 : c.value(r);
  const double lr = std::log(r);
  out.g = lr * chi;
  out.f = -lr * (chi - 1.0);
  if (r <= 0.5) {
    out.laplacian_g = 1.0 / (r * r);
  } else {
    // Laplacian of log r is 1/r^2 in d = 3
    out.laplacian_g = chi / (r * r) + lr * c.laplacian(r) + 2.0 * c.derivative(r) / r;
  }
  out.h = out.laplacian_g - 1.0 / (r * r);
  return out;
}

double gbar_laplacian_constant() {
  double sup = 1.0;  // r^2 |Laplacian g| = 1 on (0, 1/2]
  for (int i = 0; i <= 2000; ++i) {
    const double r = 0.5 + 0.5 * i / 2000.0;
    if (r >= 1.0) break;
    sup = std::max(sup, r * r * std::abs(gbar_components(r).laplacian_g));
  }
  return sup;
}

}  // namespace sbm
