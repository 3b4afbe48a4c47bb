#include "sbm/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sbm {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

std::uint64_t catalan_c(int n) {
  if (n < 1) throw DomainError("catalan_c needs n >= 1");
  if (n > 37) throw DomainError("catalan_c: c_n overflows 64 bits for n > 37");
  std::vector<u128> c(n + 1, 0);
  c[1] = 1;
  for (int m = 2; m <= n; ++m) {
    u128 s = 0;
    for (int k = 1; k < m; ++k) s += c[k] * c[m - k];
    c[m] = s;
  }
  if (c[n] > std::numeric_limits<std::uint64_t>::max()) throw DomainError("catalan_c overflow");
  return static_cast<std::uint64_t>(c[n]);
}

double gen_function_F(double theta) {
  if (theta > 0.25) throw DomainError("F(theta) closed form needs theta <= 1/4");
  return 0.5 - std::sqrt(0.25 - theta);
}

double gen_function_partial(double theta, int n_max) {
  // c_n as doubles by the same recursion; exact integers stop at n = 37
  std::vector<double> c(n_max + 1, 0.0);
  double s = 0.0;
  double p = 1.0;
  for (int m = 1; m <= n_max; ++m) {
    if (m == 1) {
      c[1] = 1.0;
    } else {
      for (int k = 1; k < m; ++k) c[m] += c[k] * c[m - k];
    }
    p *= theta;
    s += c[m] * p;
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

// P_tau on the radial grid: row i holds weights of the hat functions k in
// [lo, lo + w.size()). Exact for piecewise-linear data up to the Gauss rule.
struct RadialOperator {
  std::vector<int> lo;
  std::vector<std::vector<double>> w;

  void apply(const std::vector<double>& f, std::vector<double>& out) const {
    const std::size_t m = lo.size();
    out.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* fw = f.data() + lo[i];
      const auto& row = w[i];
      double s = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * fw[k];
      out[i] = s;
    }
  }
};

RadialOperator identity_operator(std::size_t m) {
  RadialOperator op;
  op.lo.resize(m);
  op.w.assign(m, std::vector<double>{1.0});
  for (std::size_t i = 0; i < m; ++i) op.lo[i] = static_cast<int>(i);
  return op;
}

RadialOperator build_operator(int dim, double tau, const std::vector<double>& radii) {
  const std::size_t m = radii.size();
  const auto& gl = GaussLegendre::get(8);
  const double sig = std::sqrt(tau);
  const double reach = 12.0 * sig;
  const double piece = 0.5 * sig;
  RadialOperator op;
  op.lo.resize(m);
  op.w.resize(m);
  std::vector<double> acc(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = radii[i];
    const double a = std::max(0.0, r - reach);
    const double b = r + reach;
    std::fill(acc.begin(), acc.end(), 0.0);
    std::size_t first = m;
    std::size_t last = 0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double x0 = radii[k];
      const double x1 = radii[k + 1];
      const double ca = std::max(x0, a);
      const double cb = std::min(x1, b);
      if (!(cb > ca)) continue;
      const double h = x1 - x0;
      const int pieces = std::max(1, static_cast<int>(std::ceil((cb - ca) / piece)));
      const double step = (cb - ca) / pieces;
      double w0 = 0.0;
      double w1 = 0.0;
      for (int p = 0; p < pieces; ++p) {
        const double pa = ca + p * step;
        const double half = 0.5 * step;
        const double mid = pa + half;
        for (int q = 0; q < gl.size(); ++q) {
          const double rho = mid + half * gl.nodes()[q];
          const double kv = gl.weights()[q] * half * radial_density(dim, tau, r, rho);
          const double u = (rho - x0) / h;
          w0 += kv * (1.0 - u);
          w1 += kv * u;
        }
      }
      acc[k] += w0;
      acc[k + 1] += w1;
      first = std::min(first, k);
      last = std::max(last, k + 1);
    }
    // mass beyond the grid goes to the last node (constant extension)
    if (b > radii.back()) {
      QuadratureSpec spec;
      spec.log_spaced = false;
      const double tail = integrate([&](double rho) { return radial_density(dim, tau, r, rho); }, radii.back(),
                                    std::max(b, radii.back() + reach), spec)
                              .value;
      acc[m - 1] += tail;
      last = m - 1;
      first = std::min(first, m - 1);
    }
    if (first > last) {
      first = last = i;
      acc[i] = 1.0;
    }
    op.lo[i] = static_cast<int>(first);
    op.w[i].assign(acc.begin() + first, acc.begin() + last + 1);
  }
  return op;
}

// Weights for int_0^{j h} g(s) ds on nodes 0..j: composite Boole (exact for
// quintics) with a Simpson / 3-8 lead-in when 4 does not divide j. The lead-in
// only covers a few intervals so the global order stays 6. j = 1 is trapezoid.
std::vector<double> time_weights(int j, double h) {
  std::vector<double> w(j + 1, 0.0);
  if (j == 0) return w;
  if (j == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  auto simpson = [&](int i) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  };
  auto three_eighths = [&](int i) {
    const double c = 3.0 * h / 8.0;
    w[i] += c;
    w[i + 1] += 3.0 * c;
    w[i + 2] += 3.0 * c;
    w[i + 3] += c;
  };
  int start = 0;
  switch (j % 4) {
    case 1:
      if (j == 5) {
        simpson(0);
        three_eighths(2);
        return w;
      }
      simpson(0);
      three_eighths(2);
      start = 5;
      break;
    case 2:
      simpson(0);
      start = 2;
      break;
    case 3:
      three_eighths(0);
      start = 3;
      break;
    default:
      break;
  }
  const double c = 2.0 * h / 45.0;
  for (int i = start; i + 4 <= j; i += 4) {
    w[i] += 7.0 * c;
    w[i + 1] += 32.0 * c;
    w[i + 2] += 12.0 * c;
    w[i + 3] += 32.0 * c;
    w[i + 4] += 7.0 * c;
  }
  return w;
}

std::vector<double> radial_grid(double r_max, int nodes, const std::vector<double>& probes) {
  // sinh stretching puts roughly 3% of the mean spacing at the centre
  const double beta = 5.0;
  std::vector<double> r;
  r.reserve(nodes + probes.size());
  for (int k = 0; k < nodes; ++k) {
    const double u = static_cast<double>(k) / (nodes - 1);
    r.push_back(r_max * std::sinh(beta * u) / std::sinh(beta));
  }
  for (double p : probes) {
    if (!(p >= 0.0) || p > r_max) throw DomainError("cumulant probe radius outside the grid");
    r.push_back(p);
  }
  std::sort(r.begin(), r.end());
  std::vector<double> out;
  for (double v : r) {
    if (out.empty() || v - out.back() > 1e-12 * (1.0 + v)) {
      out.push_back(v);
    } else {
      out.back() = v;  // keep the probe value exactly
    }
  }
  return out;
}

std::vector<double> kernel_breaks(const KernelDescriptor& phi) {
  if (phi.tag == KernelTag::Mollified || phi.tag == KernelTag::Heat || phi.tag == KernelTag::PhiSmooth ||
      phi.tag == KernelTag::LogKSmooth) {
    const double s = std::sqrt(phi.param);
    return {s, 2.0 * s, 4.0 * s, 8.0 * s};
  }
  return {};
}

// v_1 at every grid time and radius.
std::vector<std::vector<double>> first_level(const KernelDescriptor& phi, const std::vector<double>& times,
                                             const std::vector<double>& radii, const QuadratureSpec& spec) {
  const int dim = phi.dim;
  const auto breaks = kernel_breaks(phi);
  auto f = [&phi](double rho) { return phi.radial(rho); };
  std::vector<std::vector<double>> v(times.size(), std::vector<double>(radii.size(), 0.0));
  if (phi.tag == KernelTag::Const) {
    for (std::size_t j = 0; j < times.size(); ++j) std::fill(v[j].begin(), v[j].end(), phi.radial(0.0) * times[j]);
    return v;
  }
  if (dim == 3) {
    for (std::size_t j = 1; j < times.size(); ++j) {
      for (std::size_t i = 0; i < radii.size(); ++i) {
        v[j][i] = occupation_radial(3, times[j], radii[i], f, spec, breaks).value;
      }
    }
    return v;
  }
  // d=2: first step by nested quadrature, then 4-point Gauss in s per step
  const auto& gl = GaussLegendre::get(4);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    v[1][i] = occupation_radial(2, times[1], radii[i], f, spec, breaks).value;
    for (std::size_t j = 2; j < times.size(); ++j) {
      const double inc = gl.apply(
          [&](double s) { return expect_radial(2, s, radii[i], f, spec, breaks).value; }, times[j - 1], times[j]);
      v[j][i] = v[j - 1][i] + inc;
    }
  }
  return v;
}

}  // namespace

const std::vector<std::vector<double>>& CumulantTable::history(int n) const {
  if (n < 1 || n > n_max_) throw DomainError("cumulant order outside the table");
  return v_[n - 1];
}

double CumulantTable::value(int n, double r) const {
  const auto& v = at_horizon(n);
  if (r <= radii_.front()) return v.front();
  if (r >= radii_.back()) return v.back();
  const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - radii_.begin()) - 1;
  const double u = (r - radii_[k]) / (radii_[k + 1] - radii_[k]);
  return (1.0 - u) * v[k] + u * v[k + 1];
}

double CumulantTable::pair(int n, const AtomicMeasure& mu) const {
  if (mu.dim() != kernel_.dim) throw DomainError("measure dimension differs from the kernel");
  double s = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    s += mu.masses()[a] * value(n, distance(mu.points()[a], kernel_.center, kernel_.dim));
  }
  return s;
}

CumulantTable v_recursion(const KernelDescriptor& phi, double t, int n_max, const CumulantOptions& options) {
  require_dim(phi.dim);
  if (!(t > 0.0)) throw DomainError("v_recursion needs t > 0");
  if (n_max < 1 || n_max > 8) throw DomainError("v_recursion supports 1 <= n_max <= 8");
  if (options.time_steps < 2) throw DomainError("v_recursion needs at least 2 time steps");
  if (options.radial_nodes < 16) throw DomainError("v_recursion needs at least 16 radial nodes");
  switch (phi.tag) {
    case KernelTag::LogK:
    case KernelTag::GBar:
    case KernelTag::LogKSmooth:
      throw DomainError("v_recursion needs a nonnegative radial kernel");
    default:
      break;
  }

  const int steps = options.time_steps;
  const double h = t / steps;
  double r_max = options.r_max;
  if (r_max <= 0.0) {
    double pmax = 0.0;
    for (double p : options.probes) pmax = std::max(pmax, p);
    r_max = pmax + 12.0 * std::sqrt(t) + 1.0;
  }

  CumulantTable table;
  table.kernel_ = phi;
  table.t_ = t;
  table.n_max_ = n_max;
  table.radii_ = radial_grid(r_max, options.radial_nodes, options.probes);
  table.times_.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) table.times_[j] = j * h;
  const auto& radii = table.radii_;
  const std::size_t m = radii.size();

  table.v_.resize(n_max);
  table.v_[0] = first_level(phi, table.times_, radii, options.spec);
  if (n_max == 1) return table;

  // P_{k h} for k = 0..steps
  std::vector<RadialOperator> ops;
  ops.reserve(steps + 1);
  ops.push_back(identity_operator(m));
  for (int k = 1; k <= steps; ++k) ops.push_back(build_operator(phi.dim, k * h, radii));

  std::vector<std::vector<double>> weights(steps + 1);
  for (int j = 0; j <= steps; ++j) weights[j] = time_weights(j, h);

  std::vector<double> tmp;
  for (int n = 2; n <= n_max; ++n) {
    // source w_n(s) = sum_k v_k(s) v_{n-k}(s)
    std::vector<std::vector<double>> src(steps + 1, std::vector<double>(m, 0.0));
    for (int j = 0; j <= steps; ++j) {
      for (int k = 1; k < n; ++k) {
        const auto& a = table.v_[k - 1][j];
        const auto& b = table.v_[n - k - 1][j];
        for (std::size_t i = 0; i < m; ++i) src[j][i] += a[i] * b[i];
      }
    }
    auto& out = table.v_[n - 1];
    out.assign(steps + 1, std::vector<double>(m, 0.0));
    for (int j = 1; j <= steps; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double w = weights[j][i];
        if (w == 0.0) continue;
        ops[j - i].apply(src[i], tmp);
        for (std::size_t r = 0; r < m; ++r) out[j][r] += w * tmp[r];
      }
    }
  }
  return table;
}

double cumulants_kappa(const CumulantTable& table, const AtomicMeasure& mu, int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return 2.0 * f * table.pair(n, mu) / std::pow(2.0, n);
}

std::vector<double> central_moments_from_cumulants(std::span<const double> kappa) {
  std::vector<double> m(5, 0.0);
  if (kappa.size() > 2) m[2] = kappa[2];
  if (kappa.size() > 3) m[3] = kappa[3];
  if (kappa.size() > 4) m[4] = kappa[4] + 3.0 * kappa[2] * kappa[2];
  return m;
}

std::vector<GrowthBoundCheck> check_growth_bound(const CumulantTable& table, double envelope_constant) {
  std::vector<GrowthBoundCheck> out;
  const double t = table.horizon();
  for (int n = 1; n <= table.n_max(); ++n) {
    const double bound =
        static_cast<double>(catalan_c(n)) * std::pow(envelope_constant, n) * std::pow(t, (3.0 * n - 2.0) / 2.0);
    GrowthBoundCheck c;
    c.n = n;
    for (double v : table.at_horizon(n)) c.worst_ratio = std::max(c.worst_ratio, v / bound);
    c.holds = c.worst_ratio <= 1.0;
    out.push_back(c);
  }
  return out;
}

double time_refinement_change(const KernelDescriptor& phi, double t, double probe, CumulantOptions options) {
  options.probes.push_back(probe);
  const double coarse = v_recursion(phi, t, 2, options).value(2, probe);
  options.time_steps *= 2;
  const double fine = v_recursion(phi, t, 2, options).value(2, probe);
  return std::abs(fine - coarse) / std::abs(fine);
}

ExpMomentBound exp_moment_bound(const KernelDescriptor& f, double t, const SpacePoint& start) {
  if (!(t > 0.0)) throw DomainError("exp_moment_bound needs t > 0");
  ExpMomentBound b;
  const int dim = f.dim;
  auto g = [&f](double rho) { return f.radial(rho); };
  const auto breaks = kernel_breaks(f);
  b.G = occupation_radial(dim, t, 0.0, g, {}, breaks).value;
  b.mean_term = expect_radial(dim, t, distance(start, f.center, dim), g, {}, breaks).value;
  if (b.G >= 2.0) {
    b.diverges = true;
    b.bound = ExtendedReal::infinity();
  } else {
    b.bound = std::exp(b.mean_term / (1.0 - 0.5 * b.G));
  }
  return b;
}

namespace {

double central_moment(std::span<const double> x, int k, double mean) {
  double s = 0.0;
  for (double v : x) s += std::pow(v - mean, k);
  return s / static_cast<double>(x.size());
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

std::vector<MomentComparison> mc_crosscheck_moments(std::span<const double> samples, std::span<const double> kappa,
                                                    int max_order, std::uint64_t seed, int bootstrap_resamples) {
  if (samples.size() < 200) throw DomainError("moment cross-check needs at least 200 replicates");
  if (max_order < 1 || max_order > 4) throw DomainError("moment cross-check supports orders 1..4");
  if (static_cast<int>(kappa.size()) <= max_order) throw DomainError("not enough cumulants for the requested order");
  const double n = static_cast<double>(samples.size());
  const double mean = mean_of(samples);
  const auto predicted = central_moments_from_cumulants(kappa);
  std::vector<MomentComparison> out;

  MomentComparison c1;
  c1.order = 1;
  c1.empirical = mean;
  c1.se = std::sqrt(central_moment(samples, 2, mean) * n / (n - 1.0) / n);
  c1.predicted = kappa[1];
  out.push_back(c1);

  if (max_order >= 2) {
    MomentComparison c2;
    c2.order = 2;
    const double m2 = central_moment(samples, 2, mean);
    const double m4 = central_moment(samples, 4, mean);
    c2.empirical = m2 * n / (n - 1.0);
    c2.se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    c2.predicted = predicted[2];
    out.push_back(c2);
  }
  if (max_order >= 3) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    std::vector<double> boot(samples.size());
    std::vector<double> m3s;
    std::vector<double> m4s;
    for (int b = 0; b < bootstrap_resamples; ++b) {
      for (auto& v : boot) v = samples[pick(rng)];
      const double bm = mean_of(boot);
      m3s.push_back(central_moment(boot, 3, bm));
      m4s.push_back(central_moment(boot, 4, bm));
    }
    auto sd = [](const std::vector<double>& v) {
      const double m = mean_of(v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    for (int k = 3; k <= max_order; ++k) {
      MomentComparison c;
      c.order = k;
      c.empirical = central_moment(samples, k, mean);
      c.se = sd(k == 3 ? m3s : m4s);
      c.predicted = predicted[k];
      out.push_back(c);
    }
  }
  for (auto& c : out) c.z = c.se > 0.0 ? (c.empirical - c.predicted) / c.se : 0.0;
  return out;
}

}  // namespace sbm
