#include "doctest.h"
#include "oracles.hpp"

#include "sbm/localtime.hpp"

using namespace sbm;
using doctest::Approx;

namespace {
constexpr double c = 1.0 / (2.0 * oracle::pi);
}

TEST_CASE("renormalisation statistics") {
  CHECK(renorm_psi(std::exp(-1.0)) == Approx(1.0 / (std::sqrt(2.0) * oracle::pi)).epsilon(1e-14));
  CHECK(renorm_psi(std::exp(-1.0)) == Approx(0.225079079039).epsilon(1e-10));
  for (double r : {0.5, 0.1, 0.01}) {
    CHECK(renorm_stat_d3(c / r, r) == Approx(0.0).epsilon(1e-12));
    CHECK(renorm_stat_d2(std::log(1.0 / r) / oracle::pi, r) == Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(renorm_psi(1.0), DomainError);
  CHECK_THROWS_AS(renorm_stat_d3(1.0, 1.5), DomainError);
  CHECK_THROWS_AS(renorm_stat_d2(1.0, 0.0), DomainError);
}

TEST_CASE("rate sequence") {
  const std::vector<double> radii{0.25, 0.125, 0.0625};
  std::vector<double> exact;
  for (double r : radii) exact.push_back(c / r);
  for (double v : rate_sequence(exact, radii, 0.5)) CHECK(v == 0.0);
  const auto e = rate_sequence({1.0, 1.0, 1.0}, radii, 0.5);
  CHECK(e[0] == Approx(std::sqrt(0.25) * std::abs(1.0 - c / 0.25)));
  CHECK_THROWS_AS(rate_sequence(exact, radii, 1.0), DomainError);
  CHECK_THROWS_AS(rate_sequence(exact, {0.1, 0.2, 0.05}, 0.5), DomainError);
  CHECK_THROWS_AS(rate_sequence({1.0}, radii, 0.5), DomainError);
}

TEST_CASE("bad-point normalisers") {
  AtomicMeasure mu(3);
  mu.add(SpacePoint{}, 0.5);
  mu.add(SpacePoint::on_axis(1.0), 0.5);
  for (int n = 1; n <= 6; ++n) {
    const double x = std::ldexp(1.0, -n);
    const auto nz = bad_point_normalizers(mu, SpacePoint::on_axis(x));
    const double expect = (1.0 / (4.0 * oracle::pi)) * std::ldexp(1.0, n) + (1.0 / (4.0 * oracle::pi)) / (1.0 - x);
    CHECK(nz.newtonian == Approx(expect).epsilon(1e-14));
    CHECK(nz.log_plus == Approx(0.5 * std::log(1.0 / x) + 0.5 * std::log(1.0 / (1.0 - x))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(bad_point_normalizers(mu, SpacePoint{}), DomainError);
  CHECK_THROWS_AS(bad_point_normalizers(mu, SpacePoint::on_axis(1.0)), DomainError);
  CHECK(mu.in_bad_set(SpacePoint{}));
  CHECK_FALSE(mu.in_bad_set(SpacePoint::on_axis(0.5)));

  const auto d0 = AtomicMeasure::delta(3);
  for (double r : {0.3, 0.05}) {
    const auto nz = bad_point_normalizers(d0, SpacePoint::on_axis(r));
    for (double L : {0.0, 2.0, 40.0}) CHECK(bad_point_statistic(L, nz) == Approx(renorm_stat_d3(L, r)).epsilon(1e-13));
  }
}

TEST_CASE("default bandwidth") {
  CHECK(default_bandwidth(3, 1000, 1.0 / 4000) == Approx(0.5 * std::pow(1000.0, -0.2)));
  CHECK(default_bandwidth(2, 10, 0.01) == Approx(0.5 * std::pow(10.0, -0.25)));
  CHECK(default_bandwidth(2, 10, 0.04) == Approx(0.4));
  CHECK_THROWS_AS(default_bandwidth(3, 0, 0.1), DomainError);
}

TEST_CASE("local time mean is the smoothed potential of the initial measure") {
  AtomicMeasure mu(3);
  mu.add(SpacePoint{}, 0.25);
  mu.add(SpacePoint::on_axis(1.0), 0.75);
  const SpacePoint x = SpacePoint::on_axis(0.3);
  const double expect = 0.25 * smoothed_q(3, 1.0, 0.01, 0.3) + 0.75 * smoothed_q(3, 1.0, 0.01, 0.7);
  CHECK(local_time_mean(mu, TimeHorizon::finite(1.0), 0.01, x) == Approx(expect).epsilon(1e-14));
  CHECK(local_time_mean(AtomicMeasure::delta(3), TimeHorizon::forever(), 0.01, x) ==
        Approx(c * std::erf(0.3 / std::sqrt(0.02)) / 0.3).epsilon(1e-13));
  CHECK_THROWS_AS(local_time_mean(AtomicMeasure::delta(2), TimeHorizon::forever(), 0.01, x), DomainError);
}

TEST_CASE("Tanaka decomposition is exact per path") {
  for (int dim : {3, 2}) {
    const SpacePoint x = SpacePoint::on_axis(0.4);
    const double eps = 0.01;
    SimConfig cfg;
    cfg.dim = dim;
    cfg.particles_per_unit_mass = 60;
    cfg.initial = AtomicMeasure::delta(dim);
    cfg.horizon = TimeHorizon::finite(0.5);
    cfg.kernels = tanaka_kernels(dim, x, eps);
    for (std::uint64_t s = 1; s <= 5; ++s) {
      cfg.seed = s;
      const auto p = simulate(cfg);
      const auto d = tanaka_decompose(p, cfg.initial, x, eps);
      const double F0 = dim == 3 ? kernel::phi_smooth(x, eps)(SpacePoint{}) : kernel::log_k_smooth(x, eps)(SpacePoint{});
      CHECK(d.initial == Approx(F0).epsilon(1e-14));
      if (dim == 3) {
        CHECK((d.local_time - d.initial) == Approx(d.martingale - d.terminal).epsilon(1e-12));
        REQUIRE(d.quadratic_variation.has_value());
        CHECK(*d.quadratic_variation == Approx(c * c * 2.0 * *d.half_inv_sq).epsilon(1e-12));
      } else {
        CHECK(d.martingale == Approx(d.terminal - oracle::pi * d.local_time - d.initial).epsilon(1e-12));
        CHECK_FALSE(d.quadratic_variation.has_value());
      }
      CHECK(d.local_time >= 0.0);
    }
  }
}

TEST_CASE("local time is nondecreasing in t on each path") {
  const SpacePoint x = SpacePoint::on_axis(0.2);
  SimConfig cfg;
  cfg.particles_per_unit_mass = 40;
  cfg.horizon = TimeHorizon::finite(1.0);
  cfg.record_times = {0.1, 0.2, 0.4, 0.8};
  cfg.kernels = {kernel::mollified(3, x, 0.02)};
  for (std::uint64_t s = 1; s <= 10; ++s) {
    cfg.seed = s;
    const auto p = simulate(cfg);
    double prev = 0.0;
    for (double t : cfg.record_times) {
      const double v = estimate_local_time(p, x, 0.02, t).value;
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(estimate_local_time(p, x, 0.02).value >= prev);
  }
}
