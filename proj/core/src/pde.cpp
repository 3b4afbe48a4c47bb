#include "sbm/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbm/errors.hpp"
#include "sbm/space.hpp"

namespace sbm {

namespace {

// Residual of W_uu - W_u - e^u W^2 = 0 on the uniform u-grid, with the inner
// Dirichlet row and the outer ghost-node row.
void residual(const std::vector<double>& W, const std::vector<double>& er, double h, double w0, FarField ff,
              std::vector<double>& F) {
  const std::size_t m = W.size();
  const double h2 = h * h;
  F[0] = W[0] - w0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    F[i] = (W[i + 1] - 2.0 * W[i] + W[i - 1]) / h2 - (W[i + 1] - W[i - 1]) / (2.0 * h) - er[i] * W[i] * W[i];
  }
  const std::size_t n = m - 1;
  if (ff == FarField::Neumann) {
    F[n] = 2.0 * (W[n - 1] - W[n]) / h2 - er[n] * W[n] * W[n];
  } else {
    F[n] = (2.0 * W[n - 1] - 2.0 * h * W[n] - 2.0 * W[n]) / h2 + W[n] - er[n] * W[n] * W[n];
  }
}

double max_abs(const std::vector<double>& v, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace

RadialSolution solve_radial(double lambda, double r_min, double r_max, int M, const RadialSolveOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("solve_radial needs lambda > 0");
  if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("solve_radial needs 0 < r_min < r_max");
  if (M < 200) throw DomainError("solve_radial needs M >= 200");

  const std::size_t m = static_cast<std::size_t>(M);
  const double u0 = std::log(r_min);
  const double h = (std::log(r_max) - u0) / (M - 1);
  const double w0 = lambda / (2.0 * constants::pi);

  RadialSolution s;
  s.lambda = lambda;
  s.r_min = r_min;
  s.r_max = r_max;
  s.far_field = options.far_field;
  s.r.resize(m);
  std::vector<double> er(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.r[i] = std::exp(u0 + h * static_cast<double>(i));
    er[i] = s.r[i];
  }
  s.r.front() = r_min;
  s.r.back() = r_max;

  auto& W = s.W;
  W.resize(m);
  for (std::size_t i = 0; i < m; ++i) W[i] = w0 * (1.0 + r_min) / (1.0 + s.r[i]);

  const double h2 = h * h;
  std::vector<double> F(m), a(m), b(m), c(m), d(m), trial(m), Ft(m);
  auto scaled = [&](const std::vector<double>& res, const std::vector<double>& w) {
    return max_abs(res, 1) * h2 / max_abs(w);
  };
  residual(W, er, h, w0, options.far_field, F);
  double norm = scaled(F, W);
  s.residual_trace.push_back(norm);

  int it = 0;
  for (; it < options.max_iterations && norm > options.tolerance; ++it) {
    // tridiagonal Jacobian; d receives -F and then the Newton step
    b[0] = 1.0;
    c[0] = 0.0;
    a[0] = 0.0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      a[i] = 1.0 / h2 + 0.5 / h;
      b[i] = -2.0 / h2 - 2.0 * er[i] * W[i];
      c[i] = 1.0 / h2 - 0.5 / h;
    }
    const std::size_t n = m - 1;
    a[n] = 2.0 / h2;
    c[n] = 0.0;
    if (options.far_field == FarField::Neumann) {
      b[n] = -2.0 / h2 - 2.0 * er[n] * W[n];
    } else {
      b[n] = (-2.0 * h - 2.0) / h2 + 1.0 - 2.0 * er[n] * W[n];
    }
    for (std::size_t i = 0; i < m; ++i) d[i] = -F[i];
    // Thomas
    for (std::size_t i = 1; i < m; ++i) {
      const double f = a[i] / b[i - 1];
      b[i] -= f * c[i - 1];
      d[i] -= f * d[i - 1];
    }
    d[n] /= b[n];
    for (std::size_t i = n; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, step *= 0.5) {
      bool positive = true;
      for (std::size_t i = 0; i < m; ++i) {
        trial[i] = W[i] + step * d[i];
        if (!(trial[i] > 0.0)) positive = false;
      }
      if (!positive) continue;
      residual(trial, er, h, w0, options.far_field, Ft);
      const double tn = scaled(Ft, trial);
      if (tn < norm || k == options.max_halvings) {
        W.swap(trial);
        F.swap(Ft);
        norm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw SimulationError("solve_radial: iterate left the positive cone after step halving");
    s.residual_trace.push_back(norm);
  }
  s.iterations = it;
  s.residual = norm;
  if (norm > options.tolerance) {
    std::string trace;
    for (double v : s.residual_trace) trace += " " + std::to_string(v);
    throw SimulationError("solve_radial: Newton did not converge; residuals" + trace);
  }
  s.V.resize(m);
  for (std::size_t i = 0; i < m; ++i) s.V[i] = W[i] / s.r[i];
  return s;
}

double RadialSolution::W_at(double rr) const {
  if (!(rr >= r_min * (1.0 - 1e-12)) || !(rr <= r_max * (1.0 + 1e-12))) {
    throw DomainError("radius outside the solved interval");
  }
  const std::size_t m = W.size();
  const double u0 = std::log(r_min);
  const double h = (std::log(r_max) - u0) / static_cast<double>(m - 1);
  const double x = (std::log(rr) - u0) / h;
  long k = static_cast<long>(std::floor(x)) - 1;
  k = std::clamp(k, 0L, static_cast<long>(m) - 4);
  // 4-point Lagrange in u
  double v = 0.0;
  for (int j = 0; j < 4; ++j) {
    double l = 1.0;
    for (int q = 0; q < 4; ++q) {
      if (q != j) l *= (x - static_cast<double>(k + q)) / static_cast<double>(j - q);
    }
    v += l * W[static_cast<std::size_t>(k + j)];
  }
  return v;
}

double second_order_ratio(const RadialSolution& s, double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("second_order_ratio needs 0 < r < 1");
  const double lead = s.lambda / (2.0 * constants::pi);
  const double denom = s.lambda * s.lambda * std::log(1.0 / r) * constants::pde_second_order;
  return (s.W_at(r) - lead) / r / denom;
}

std::vector<RatioPoint> second_order_ratios(const RadialSolution& s, int per_decade) {
  std::vector<RatioPoint> out;
  const double lo = std::log10(10.0 * s.r_min);
  const double hi = -2.0;
  const int n = static_cast<int>(std::round((hi - lo) * per_decade));
  for (int i = 0; i <= n; ++i) {
    const double r = std::pow(10.0, lo + (hi - lo) * i / std::max(n, 1));
    out.push_back({r, second_order_ratio(s, r)});
  }
  return out;
}

LaplaceEstimate laplace_exponent(std::span<const double> local_times, double lambda) {
  if (local_times.size() < 2) throw DomainError("laplace_exponent needs at least two samples");
  const double n = static_cast<double>(local_times.size());
  double mean = 0.0;
  for (double l : local_times) mean += std::exp(-lambda * l);
  mean /= n;
  double var = 0.0;
  for (double l : local_times) {
    const double e = std::exp(-lambda * l) - mean;
    var += e * e;
  }
  var /= n - 1.0;
  return {-std::log(mean), std::sqrt(var / n) / mean};
}

}  // namespace sbm
