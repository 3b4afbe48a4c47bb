#include "doctest.h"
#include "oracles.hpp"

#include "sbm/stats.hpp"

using namespace sbm;
using doctest::Approx;

TEST_CASE("summary of a known sample") {
  const std::vector<double> x{1, 2, 3, 4, 10};
  const auto s = stats::summarize(x);
  CHECK(s.n == 5);
  CHECK(s.mean == Approx(4.0));
  CHECK(s.variance == Approx(12.5));
  CHECK(s.se == Approx(std::sqrt(12.5 / 5)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 10.0);
  CHECK(s.skewness > 0.0);
}

TEST_CASE("normal cdf and Kolmogorov tail") {
  CHECK(stats::normal_cdf(0.0) == 0.5);
  CHECK(stats::normal_cdf(1.96) == Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(stats::kolmogorov_q(0.0) == 1.0);
  CHECK(stats::kolmogorov_q(1.36) == Approx(0.0494).epsilon(1e-2));
}

TEST_CASE("KS statistic of a constant sample") {
  const std::vector<double> x(60, 0.3);
  CHECK(stats::ks_normality(x).D == Approx(0.6179114222).epsilon(1e-9));
}

TEST_CASE("KS on Gaussian and shifted samples") {
  oracle::Gen g(0);
  const auto z = g.normals(500);
  CHECK(stats::ks_normality(z).p_value > 0.01);
  oracle::Gen h(1);
  CHECK(stats::ks_normality(h.normals(500, 0.5)).p_value < 1e-6);
}

TEST_CASE("ols recovers a noiseless line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = stats::ols(x, y);
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
}

TEST_CASE("variance regression brackets the true slope") {
  oracle::Gen g(4);
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<std::vector<double>> levels(4);
  for (int k = 0; k < 4; ++k) {
    const double sd = std::sqrt(x[k]);
    for (int i = 0; i < 2000; ++i) levels[k].push_back(sd * g.normal());
  }
  const auto r = stats::variance_regression(x, levels, 400, 3);
  CHECK(r.paired);
  CHECK(r.ci_lo < 1.0);
  CHECK(r.ci_hi > 1.0);
  CHECK(r.fit.slope == Approx(1.0).epsilon(0.15));
}

TEST_CASE("independence tests") {
  oracle::Gen g(8);
  const auto x = g.normals(300), y = g.normals(300);
  const auto dep = stats::independence_test("same", x, x, 200, 1);
  CHECK(dep.pearson == Approx(1.0));
  CHECK(dep.pearson_p < 0.01);
  CHECK(dep.dcor_p < 0.01);
  const auto ind = stats::independence_test("indep", x, y, 200, 1);
  CHECK(ind.pearson_p > 0.01);
  CHECK(ind.dcor_p > 0.01);
  // dependence invisible to Pearson
  std::vector<double> sq;
  for (double v : x) sq.push_back(v * v);
  CHECK(stats::independence_test("square", x, sq, 200, 1).dcor_p < 0.01);
}

TEST_CASE("quantile and z-score") {
  CHECK(stats::quantile({3, 1, 2, 4}, 0.5) == Approx(2.5));
  CHECK(stats::quantile({3, 1, 2, 4}, 0.0) == 1.0);
  CHECK(stats::quantile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(stats::z_score(1.2, 1.0, 0.1) == Approx(2.0));
}
