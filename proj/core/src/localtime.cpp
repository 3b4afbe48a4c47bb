#include "sbm/localtime.hpp"

#include <algorithm>
#include <cmath>

namespace sbm {

double default_bandwidth(int dim, std::size_t particles_per_unit_mass, double dt) {
  require_dim(dim);
  if (particles_per_unit_mass == 0 || !(dt > 0.0)) throw DomainError("default_bandwidth needs N > 0, dt > 0");
  return std::max(0.5 * std::pow(static_cast<double>(particles_per_unit_mass), -1.0 / (dim + 2)),
                  2.0 * std::sqrt(dt));
}

LocalTimeEstimate estimate_local_time(const PathRecord& path, const SpacePoint& x, double eps,
                                      std::optional<double> t) {
  if (!(eps > 0.0)) throw DomainError("bandwidth must be positive");
  LocalTimeEstimate e;
  e.x = x;
  e.eps = eps;
  e.replicate = path.seed;
  if (t && *t == 0.0) return e;
  const auto& tr = path.trace(kernel::mollified(path.dim, x, eps));
  const std::size_t i = t ? path.time_index(*t) : path.final_index();
  e.t = path.times[i];
  e.to_extinction = !t && (path.extinct || path.censored);
  e.value = tr.occupation[i];
  return e;
}

double local_time_mean(const AtomicMeasure& mu, TimeHorizon t, double eps, const SpacePoint& x) {
  const int dim = mu.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double r = distance(mu.points()[i], x, dim);
    double v;
    if (t.infinite) {
      if (dim == 2) throw DomainError("d=2 local time has infinite mean on the infinite horizon");
      v = constants::green3 * smoothed_inverse3(eps, r);
    } else {
      v = smoothed_q(dim, t.t, eps, r);
    }
    s += mu.masses()[i] * v;
  }
  return s;
}

double renorm_psi(double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("renormalisation needs 0 < |x| < 1");
  return std::sqrt(constants::variance_slope3 * std::log(1.0 / r));
}

double renorm_stat_d3(double local_time, double r) {
  return (local_time - constants::green3 / r) / renorm_psi(r);
}

double renorm_stat_d2(double local_time, double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("renormalisation needs 0 < |x| < 1");
  return local_time - constants::green2 * std::log(1.0 / r);
}

std::vector<KernelDescriptor> tanaka_kernels(int dim, const SpacePoint& x, double eps) {
  require_dim(dim);
  if (dim == 3) {
    return {kernel::mollified(3, x, eps), kernel::phi_smooth(x, eps), kernel::inv_sq(3, x), kernel::log_k(3, x)};
  }
  return {kernel::mollified(2, x, eps), kernel::log_k_smooth(x, eps)};
}

namespace {

const KernelTrace* find_trace(const PathRecord& path, const KernelDescriptor& k) {
  for (const auto& tr : path.traces) {
    if (tr.kernel == k) return &tr;
  }
  return nullptr;
}

}  // namespace

TanakaDecomposition tanaka_decompose(const PathRecord& path, const AtomicMeasure& mu, const SpacePoint& x,
                                     double eps, std::optional<double> t) {
  const int dim = path.dim;
  if (mu.dim() != dim) throw DomainError("initial measure dimension mismatch");
  const std::size_t i = t ? path.time_index(*t) : path.final_index();
  TanakaDecomposition d;
  d.dim = dim;
  d.x = x;
  d.t = path.times[i];
  d.eps = eps;
  d.local_time = path.trace(kernel::mollified(dim, x, eps)).occupation[i];

  const KernelDescriptor f = dim == 3 ? kernel::phi_smooth(x, eps) : kernel::log_k_smooth(x, eps);
  d.terminal = path.trace(f).value[i];
  for (std::size_t a = 0; a < mu.size(); ++a) d.initial += mu.masses()[a] * f(mu.points()[a]);

  const double r = norm(x, dim);
  if (dim == 3) {
    d.martingale = d.local_time + d.terminal - d.initial;
    const auto pot = mu.newtonian_potential(x);
    if (pot.is_finite() && r > 0.0 && r < 1.0) d.statistic = (d.local_time - pot.value()) / renorm_psi(r);
    const auto* inv_sq = find_trace(path, kernel::inv_sq(3, x));
    const auto* logk = find_trace(path, kernel::log_k(3, x));
    if (inv_sq) {
      const double c = constants::green3;
      d.quadratic_variation = c * c * inv_sq->occupation[i];
      if (r > 0.0 && r < 1.0) d.qv_ratio = *d.quadratic_variation / (constants::variance_slope3 * std::log(1.0 / r));
      d.half_inv_sq = 0.5 * inv_sq->occupation[i];
      d.singular_hits += inv_sq->singular_hits;
    }
    if (logk) {
      d.log_terminal = logk->value[i];
      d.singular_hits += logk->singular_hits;
    }
  } else {
    d.martingale = d.terminal - constants::pi * d.local_time - d.initial;
    if (r > 0.0 && r < 1.0) d.statistic = renorm_stat_d2(d.local_time, r);
  }
  return d;
}

std::vector<double> rate_sequence(const std::vector<double>& local_times, const std::vector<double>& radii,
                                  double alpha) {
  if (local_times.size() != radii.size()) throw DomainError("rate_sequence: length mismatch");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("rate exponent must lie in (0, 1)");
  std::vector<double> out(radii.size());
  for (std::size_t n = 0; n < radii.size(); ++n) {
    if (!(radii[n] > 0.0)) throw DomainError("rate_sequence: radius must be positive");
    if (n > 0 && !(radii[n] < radii[n - 1])) throw DomainError("rate_sequence: radii must decrease");
    out[n] = std::pow(radii[n], alpha) * std::abs(local_times[n] - constants::green3 / radii[n]);
  }
  return out;
}

BadPointNormalizers bad_point_normalizers(const AtomicMeasure& mu, const SpacePoint& x) {
  if (mu.dim() != 3) throw DomainError("bad-point experiment is three-dimensional");
  if (mu.in_bad_set(x)) throw DomainError("evaluation point coincides with an atom");
  return {mu.newtonian_potential(x).value(), mu.log_plus_potential(x).value()};
}

double bad_point_statistic(double local_time, const BadPointNormalizers& n) {
  if (!(n.log_plus > 0.0)) throw DomainError("bad-point statistic needs a positive log potential");
  return (local_time - n.newtonian) / std::sqrt(constants::variance_slope3 * n.log_plus);
}

}  // namespace sbm
