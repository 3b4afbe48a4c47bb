#include "doctest.h"
#include "oracles.hpp"

#include "sbm/cutoff.hpp"
#include "sbm/kernel_bounds.hpp"
#include "sbm/kernels.hpp"

using namespace sbm;
using doctest::Approx;

TEST_CASE("heat kernel matches the Gaussian formula") {
  for (double t : {0.01, 0.5, 3.0}) {
    for (double r : {0.0, 0.2, 1.5}) {
      CHECK(heat_kernel_radial(3, t, r) == Approx(oracle::heat3(t, r)).epsilon(1e-14));
      CHECK(heat_kernel_radial(2, t, r) == Approx(oracle::heat2(t, r)).epsilon(1e-14));
    }
  }
  CHECK(heat_kernel(3, 1.0, SpacePoint{{0.3, 0.4, 0.0}}) == Approx(oracle::heat3(1.0, 0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(heat_kernel_radial(4, 1.0, 0.1), DomainError);
}

TEST_CASE("potential q_t against a direct time integral") {
  for (double r : {0.05, 0.3, 1.0}) {
    for (double t : {0.1, 1.0, 2.5}) {
      const double q3 = oracle::simpson_sqrt([&](double s) { return oracle::heat3(s, r); }, t);
      const double q2 = oracle::simpson_sqrt([&](double s) { return oracle::heat2(s, r); }, t);
      CHECK(potential_q_radial(3, TimeHorizon::finite(t), r).value() == Approx(q3).epsilon(1e-7));
      CHECK(potential_q_radial(2, TimeHorizon::finite(t), r).value() == Approx(q2).epsilon(1e-7));
    }
  }
}

TEST_CASE("potential q_t is infinite at the pole and for d=2, t=inf") {
  CHECK(potential_q_radial(3, TimeHorizon::finite(1.0), 0.0).is_infinite());
  CHECK(potential_q_radial(2, TimeHorizon::forever(), 0.5).is_infinite());
  CHECK(potential_q_radial(3, TimeHorizon::forever(), 0.5).value() == Approx(1.0 / (2.0 * oracle::pi * 0.5)));
}

TEST_CASE("smoothed potential against a direct time integral") {
  for (double eps : {0.0004, 0.01, 0.1}) {
    for (double r : {0.02, 0.3}) {
      const double t = 1.0;
      const double o3 = oracle::simpson_sqrt([&](double s) { return oracle::heat3(s + eps, r); }, t, 20000);
      const double o2 = oracle::simpson_sqrt([&](double s) { return oracle::heat2(s + eps, r); }, t, 20000);
      CHECK(smoothed_q(3, t, eps, r) == Approx(o3).epsilon(1e-7));
      CHECK(smoothed_q(2, t, eps, r) == Approx(o2).epsilon(1e-7));
    }
  }
}

TEST_CASE("heat semigroup of 1/r against the radial density") {
  for (double eps : {0.01, 0.25}) {
    for (double a : {0.05, 0.5, 2.0}) {
      const double hi = a + 12.0 * std::sqrt(eps);
      const double o = oracle::simpson([&](double rho) { return rho == 0.0 ? 0.0 : oracle::radial3(eps, a, rho) / rho; },
                                       0.0, hi, 40000);
      CHECK(smoothed_inverse3(eps, a) == Approx(o).epsilon(1e-7));
    }
  }
}

TEST_CASE("special functions at tabulated points") {
  CHECK(special::bessel_k0(1.0) == Approx(0.42102443824070834).epsilon(1e-13));
  CHECK(special::bessel_k0(0.1) == Approx(2.4270690247020166).epsilon(1e-13));
  CHECK(special::bessel_k0(2.0) == Approx(0.11389387274953341).epsilon(1e-13));
  CHECK(special::bessel_i0e(1.0) == Approx(0.46575960759364043).epsilon(1e-13));
  CHECK(special::bessel_i0e(10.0) == Approx(2815.716628466254 * std::exp(-10.0)).epsilon(1e-12));
  CHECK(special::expint_e1(1.0) == Approx(0.21938393439552029).epsilon(1e-13));
  CHECK(special::expint_e1(10.0) == Approx(4.156968929685324e-06).epsilon(1e-12));
  for (double x : {1e-6, 0.01, 0.5, 1.5}) CHECK(special::expint_e1(x) == Approx(oracle::e1_series(x)).epsilon(1e-12));
}

TEST_CASE("gauss_time_integral against Simpson") {
  for (double c : {0.0, 0.1, 1.0}) {
    for (double t : {0.01, 1.0}) {
      const double o = oracle::simpson_sqrt(
          [&](double s) { return std::exp(-c * c / (2.0 * s)) / std::sqrt(2.0 * oracle::pi * s); }, t);
      CHECK(special::gauss_time_integral(c, t) == Approx(o).epsilon(1e-8));
    }
  }
}

TEST_CASE("regularised potentials converge to their limits at the pole") {
  const double lim3 = -2.0 / std::pow(2.0 * oracle::pi, 1.5);
  const double lim2 = (std::log(2.0) - std::numbers::egamma) / (2.0 * oracle::pi);
  CHECK(potential_q_regular3(1.0, 1e-9) == Approx(lim3).epsilon(1e-7));
  CHECK(potential_q_regular2(1.0, 1e-9) == Approx(lim2).epsilon(1e-7));
  // continuity: the modulus shrinks with the distance
  double prev = INFINITY;
  for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double d = std::abs(potential_q_regular2(1.0, r) - lim2);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("kernel descriptors evaluate by distance and clamp singularities") {
  const SpacePoint x = SpacePoint::on_axis(0.5);
  CHECK(kernel::phi(x)(SpacePoint{}) == Approx(1.0 / (2.0 * oracle::pi * 0.5)));
  CHECK(kernel::inv_sq(3, x)(SpacePoint{}) == Approx(4.0));
  CHECK(kernel::log_k(2, x)(SpacePoint{}) == Approx(std::log(0.5)));
  CHECK(kernel::inv(3, x)(x) == Approx(1.0 / kSingularityFloor));
  CHECK(kernel::mollified(3, x, 0.04)(SpacePoint{}) == Approx(oracle::heat3(0.04, 0.5)));
  CHECK(kernel::phi_smooth(x, 0.01)(SpacePoint{}) ==
        Approx(std::erf(0.5 / std::sqrt(0.02)) / (2.0 * oracle::pi * 0.5)));
  CHECK_THROWS_AS(kernel::mollified(3, x, 0.0), DomainError);
  CHECK(kernel::phi(x).singular());
  CHECK_FALSE(kernel::mollified(3, x, 0.1).singular());
}

TEST_CASE("mean identities hold at random points") {
  oracle::Gen g(7);
  for (int i = 0; i < 6; ++i) {
    const int dim = i % 2 ? 2 : 3;
    const double t = g.uniform(0.2, 2.0), r = g.log_uniform(0.05, 1.0);
    CAPTURE(dim);
    CAPTURE(t);
    CAPTURE(r);
    CHECK(verify_mean_identities(dim, t, r).max_abs_residual() < 1e-6);
  }
}

TEST_CASE("property: potentials decrease in r and increase in t") {
  oracle::Gen g(11);
  for (int i = 0; i < 200; ++i) {
    const int dim = i % 2 ? 2 : 3;
    const double r1 = g.log_uniform(1e-3, 2.0), r2 = r1 * g.uniform(1.01, 3.0);
    const double t1 = g.log_uniform(1e-2, 4.0), t2 = t1 * g.uniform(1.01, 3.0);
    const double eps = g.log_uniform(1e-4, 0.1);
    CHECK(potential_q_radial(dim, TimeHorizon::finite(t1), r1).value() >
          potential_q_radial(dim, TimeHorizon::finite(t1), r2).value());
    CHECK(smoothed_q(dim, t2, eps, r1) > smoothed_q(dim, t1, eps, r1));
  }
}

TEST_CASE("property: smoothed potential is Lipschitz in the centre") {
  // |d/dr smoothed_q| <= int_0^t |d/dr p_{s+eps}(r)| ds <= sup_r |grad| bound; checked
  // against finite differences at a fixed eps.
  oracle::Gen g(13);
  const double eps = 0.01, t = 1.0;
  double lip = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double r = 0.001 + 0.999 * i / 2000.0;
    lip = std::max(lip, std::abs(smoothed_q(3, t, eps, r + 1e-4) - smoothed_q(3, t, eps, r)) / 1e-4);
  }
  for (int i = 0; i < 200; ++i) {
    const double a = g.uniform(0.0, 1.0), b = g.uniform(0.0, 1.0);
    CHECK(std::abs(smoothed_q(3, t, eps, a) - smoothed_q(3, t, eps, b)) <= 1.01 * lip * std::abs(a - b) + 1e-12);
  }
}

TEST_CASE("inverse-power bound at random grid points") {
  oracle::Gen g(17);
  for (int i = 0; i < 30; ++i) {
    const int dim = i % 2 ? 2 : 3;
    const double alpha = g.uniform(0.2, 1.8);
    const double r = g.log_uniform(0.01, 1.0), t = g.log_uniform(0.01, 4.0);
    const double lhs = expect_radial(dim, t, r, [&](double rho) { return std::pow(rho, -alpha); }).value;
    CHECK(lhs <= inverse_power_constant(alpha, dim) * std::pow(r, -alpha));
  }
}

TEST_CASE("kernel bound grid and origin value") {
  const auto rep = verify_kernel_bounds();
  CHECK(rep.all_hold());
  CHECK(rep.rows.size() >= 5 * 5 * 3);
  CHECK(rep.bessel_origin == Approx(2.0 * std::sqrt(2.0 / oracle::pi)).epsilon(1e-6));
  CHECK(rep.bessel_origin <= std::sqrt(3.0));
}

TEST_CASE("frozen constants of the cutoff and the log kernel") {
  CHECK(chi_half(0.75) == Approx(0.453937898015).epsilon(1e-9));
  CHECK(chi_half(0.5) == 1.0);
  CHECK(chi_half(1.0) == 0.0);
  CHECK(gbar_laplacian_constant() == Approx(6.9915445132).epsilon(1e-8));
  const auto c = gbar_components(0.25);
  CHECK(c.g == Approx(std::log(0.25)));
  CHECK(c.f == 0.0);
  CHECK(gbar_components(0.0).singular);
}

TEST_CASE("resolvent kernel limit") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const double lim = (0.5 * std::log(2.0 / alpha) - std::numbers::egamma) / oracle::pi;
    CHECK(f_alpha_limit(alpha) == Approx(lim).epsilon(1e-14));
    CHECK(f_alpha_decomposition(alpha).total() == Approx(lim).epsilon(1e-9));
    CHECK(f_alpha(alpha, 1e-5) == Approx(lim).epsilon(1e-6));
  }
  // beyond r = 1 there is no log correction
  CHECK(f_alpha(0.5, 2.0) == Approx(0.11389387274953341 / oracle::pi).epsilon(1e-12));
}
