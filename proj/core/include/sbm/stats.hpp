#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sbm::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;        // of the mean
  double skewness = 0.0;  // g1
  double excess_kurtosis = 0.0;  // g2
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(std::span<const double> x);

// Standard error of the unbiased sample variance, sqrt((m4 - m2^2) / n).
double variance_se(std::span<const double> x);

double normal_cdf(double z);
// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double D = 0.0;
  double p_value = 0.0;
};
// Two-sided KS against N(0,1); p from Q((sqrt(n) + 0.12 + 0.11/sqrt(n)) D).
KsResult ks_normality(std::span<const double> samples);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit ols(std::span<const double> x, std::span<const double> y);

struct VarianceRegression {
  LineFit fit;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> variances;  // per level
  std::vector<double> variance_se;
  bool paired = false;
};
// OLS of per-level sample variance on x. When every level has the same number
// of samples they are treated as paired (same replicate index = same path) and
// the bootstrap resamples replicates jointly; otherwise levels are resampled
// independently.
VarianceRegression variance_regression(std::span<const double> x, const std::vector<std::vector<double>>& samples,
                                       int resamples = 1000, std::uint64_t seed = 0, double level = 0.95);

double pearson(std::span<const double> x, std::span<const double> y);
double distance_correlation(std::span<const double> x, std::span<const double> y);

struct IndependenceResult {
  std::string name;
  double pearson = 0.0;
  double pearson_p = 0.0;
  double dcor = 0.0;
  double dcor_p = 0.0;
};
// Permutation p-values (add-one) with `permutations` shuffles of y.
IndependenceResult independence_test(const std::string& name, std::span<const double> x, std::span<const double> y,
                                     int permutations = 10000, std::uint64_t seed = 0);

double z_score(double estimate, double target, double se);

// Quantile by linear interpolation of the sorted sample.
double quantile(std::vector<double> x, double q);

}  // namespace sbm::stats
