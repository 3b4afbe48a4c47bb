#include "sbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sbm/errors.hpp"

namespace sbm::stats {

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (s.n == 0) return s;
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  s.min = x[0];
  s.max = x[0];
  for (double v : x) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (s.n > 1) {
    s.variance = m2 * n / (n - 1.0);
    s.se = std::sqrt(s.variance / n);
  }
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

double variance_se(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw DomainError("variance_se needs two samples");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_normality(std::span<const double> samples) {
  if (samples.size() < 50) throw DomainError("ks_normality needs at least 50 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

LineFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("ols needs two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("ols: degenerate design (all x equal)");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

namespace {

double sample_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return s / (n - 1.0);
}

}  // namespace

VarianceRegression variance_regression(std::span<const double> x, const std::vector<std::vector<double>>& samples,
                                       int resamples, std::uint64_t seed, double level) {
  if (x.size() != samples.size()) throw DomainError("variance_regression: one sample set per level");
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 4) {
    throw DomainError("variance_regression needs at least 4 distinct levels");
  }
  VarianceRegression out;
  for (const auto& s : samples) {
    if (s.size() < 2) throw DomainError("variance_regression: each level needs two samples");
    out.variances.push_back(sample_variance(s));
    out.variance_se.push_back(variance_se(s));
  }
  out.fit = ols(x, out.variances);

  out.paired = std::all_of(samples.begin(), samples.end(),
                           [&](const auto& s) { return s.size() == samples.front().size(); });
  std::mt19937_64 rng(seed);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> vars(samples.size());
  std::vector<double> buf;
  std::vector<std::size_t> idx;
  for (int b = 0; b < resamples; ++b) {
    if (out.paired) {
      const std::size_t n = samples.front().size();
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      idx.resize(n);
      for (auto& i : idx) i = pick(rng);
      for (std::size_t l = 0; l < samples.size(); ++l) {
        buf.resize(n);
        for (std::size_t k = 0; k < n; ++k) buf[k] = samples[l][idx[k]];
        vars[l] = sample_variance(buf);
      }
    } else {
      for (std::size_t l = 0; l < samples.size(); ++l) {
        const std::size_t n = samples[l].size();
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        buf.resize(n);
        for (std::size_t k = 0; k < n; ++k) buf[k] = samples[l][pick(rng)];
        vars[l] = sample_variance(buf);
      }
    }
    slopes.push_back(ols(x, vars).slope);
  }
  const double a = 0.5 * (1.0 - level);
  out.ci_lo = quantile(slopes, a);
  out.ci_hi = quantile(slopes, 1.0 - a);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: unpaired or too short samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Double-centred distance matrix, row-major n x n.
std::vector<double> centred_distances(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> a(n * n);
  std::vector<double> row(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::abs(x[i] - x[j]);
      a[i * n + j] = d;
      row[i] += d;
    }
    total += row[i];
  }
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] += -row[i] / nn - row[j] / nn + total / (nn * nn);
  }
  return a;
}

double dcov2(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data() + i * n;
    const double* br = b.data() + perm[i] * n;
    for (std::size_t j = 0; j < n; ++j) s += ar[j] * br[perm[j]];
  }
  return s / static_cast<double>(n * n);
}

double dcor_from(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& perm,
                 double va, double vb) {
  if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
  const double c = dcov2(a, b, perm);
  return std::sqrt(std::max(0.0, c) / std::sqrt(va * vb));
}

}  // namespace

double distance_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("distance_correlation: unpaired or too short samples");
  const auto a = centred_distances(x);
  const auto b = centred_distances(y);
  std::vector<std::size_t> id(x.size());
  std::iota(id.begin(), id.end(), 0);
  return dcor_from(a, b, id, dcov2(a, a, id), dcov2(b, b, id));
}

IndependenceResult independence_test(const std::string& name, std::span<const double> x, std::span<const double> y,
                                     int permutations, std::uint64_t seed) {
  if (x.size() != y.size()) throw DomainError("independence_test: unpaired samples");
  if (x.size() < 3) throw DomainError("independence_test: too few samples");
  IndependenceResult r;
  r.name = name;
  const std::size_t n = x.size();
  const auto a = centred_distances(x);
  const auto b = centred_distances(y);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const double va = dcov2(a, a, perm);
  const double vb = dcov2(b, b, perm);
  r.pearson = pearson(x, y);
  r.dcor = dcor_from(a, b, perm, va, vb);

  std::mt19937_64 rng(seed);
  std::vector<double> yp(n);
  int hit_p = 0, hit_d = 0;
  for (int k = 0; k < permutations; ++k) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
    if (std::abs(pearson(x, yp)) >= std::abs(r.pearson)) ++hit_p;
    if (dcor_from(a, b, perm, va, vb) >= r.dcor) ++hit_d;
  }
  r.pearson_p = (hit_p + 1.0) / (permutations + 1.0);
  r.dcor_p = (hit_d + 1.0) / (permutations + 1.0);
  return r;
}

double z_score(double estimate, double target, double se) {
  if (!(se > 0.0)) return estimate == target ? 0.0 : std::copysign(INFINITY, estimate - target);
  return (estimate - target) / se;
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw DomainError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const std::size_t k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= x.size()) return x.back();
  const double u = pos - static_cast<double>(k);
  return (1.0 - u) * x[k] + u * x[k + 1];
}

}  // namespace sbm::stats
