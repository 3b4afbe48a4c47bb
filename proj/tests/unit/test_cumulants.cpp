#include "doctest.h"
#include "oracles.hpp"

#include "sbm/cumulants.hpp"
#include "sbm/errors.hpp"

using namespace sbm;
using doctest::Approx;

TEST_CASE("recursion constants are shifted Catalan numbers") {
  for (int n = 1; n <= 30; ++n) {
    const int k = n - 1;
    CHECK(catalan_c(n) == oracle::binomial(2 * k, k) / static_cast<std::uint64_t>(k + 1));
  }
  CHECK(catalan_c(37) > catalan_c(36));
  CHECK_THROWS(catalan_c(38));
  CHECK_THROWS(catalan_c(0));
}

TEST_CASE("generating function") {
  CHECK(gen_function_F(0.0) == 0.0);
  CHECK(gen_function_F(0.25) == 0.5);
  CHECK_THROWS_AS(gen_function_F(0.3), DomainError);
  oracle::Gen g(3);
  for (int i = 0; i < 100; ++i) {
    const double th = g.uniform(0.0, 0.25);
    const double F = gen_function_F(th);
    CHECK(F - th == Approx(F * F).epsilon(1e-12));
  }
  // tail after 40 terms at 0.2 is below 1e-6; after 30 it is 3.5e-6
  CHECK(std::abs(gen_function_partial(0.2, 40) - gen_function_F(0.2)) < 1e-6);
  CHECK(std::abs(gen_function_partial(0.2, 30) - gen_function_F(0.2)) == Approx(3.496e-6).epsilon(1e-3));
}

TEST_CASE("constant kernel: closed forms of v_2, v_3, v_4") {
  CumulantOptions opt;
  opt.time_steps = 128;
  opt.radial_nodes = 16;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto tab = v_recursion(kernel::constant(3, 1.0), t, 4, opt);
    const auto d0 = AtomicMeasure::delta(3);
    CHECK(tab.pair(1, d0) == Approx(t).epsilon(1e-12));
    CHECK(tab.pair(2, d0) == Approx(t * t * t / 3.0).epsilon(1e-10));
    CHECK(tab.pair(3, d0) == Approx(2.0 * std::pow(t, 5) / 15.0).epsilon(1e-9));
    CHECK(tab.pair(4, d0) == Approx(17.0 * std::pow(t, 7) / 315.0).epsilon(1e-8));
    // cumulants of the total occupation: mean t, variance t^3/3
    CHECK(cumulants_kappa(tab, d0, 1) == Approx(t));
    CHECK(cumulants_kappa(tab, d0, 2) == Approx(t * t * t / 3.0));
  }
}

TEST_CASE("central moments from cumulants") {
  const std::vector<double> k{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto m = central_moments_from_cumulants(k);
  CHECK(m[2] == Approx(2.0));
  CHECK(m[3] == Approx(3.0));
  CHECK(m[4] == Approx(16.0));
}

TEST_CASE("inverse kernel: v_1 closed form and frozen v_2") {
  CumulantOptions opt;
  opt.probes = {0.3};
  const auto tab = v_recursion(kernel::inv(3, SpacePoint{}), 1.0, 3, opt);
  const double v1 = std::erf(0.3 / std::sqrt(2.0)) / 0.3 + special::gauss_time_integral(0.3, 1.0);
  CHECK(tab.value(1, 0.3) == Approx(v1).epsilon(1e-8));
  CHECK(tab.value(2, 0.3) == Approx(0.405885633).epsilon(1e-3));
  // radially decreasing, nondecreasing in time
  for (int n = 1; n <= 3; ++n) {
    const auto& v = tab.at_horizon(n);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1] * (1.0 + 1e-12));
    const auto& h = tab.history(n);
    for (std::size_t j = 1; j < h.size(); ++j) CHECK(h[j][10] >= h[j - 1][10]);
  }
  // pairing uses the distance to the kernel centre only
  CHECK(tab.pair(2, AtomicMeasure::delta(3, SpacePoint::on_axis(0.3))) ==
        Approx(tab.pair(2, AtomicMeasure::delta(3, SpacePoint{{0.0, -0.3, 0.0}}))).epsilon(1e-12));
  for (const auto& g : check_growth_bound(tab, std::sqrt(3.0))) CHECK(g.holds);
}

TEST_CASE("recursion input validation") {
  CHECK_THROWS(v_recursion(kernel::log_k(3, SpacePoint{}), 1.0, 2));
  CHECK_THROWS(v_recursion(kernel::constant(3, 1.0), 1.0, 9));
  CHECK_THROWS(v_recursion(kernel::constant(3, 1.0), -1.0, 2));
}

TEST_CASE("exponential moment bound") {
  for (double th : {0.1, 0.5, 1.0}) {
    for (double t : {0.5, 1.0}) {
      const auto b = exp_moment_bound(kernel::constant(3, th), t);
      CHECK(b.G == Approx(th * t));
      REQUIRE_FALSE(b.diverges);
      CHECK(b.bound.value() == Approx(std::exp(th / (1.0 - th * t / 2.0))).epsilon(1e-12));
    }
  }
  CHECK(exp_moment_bound(kernel::constant(3, 1.0), 2.0).diverges);
  // G for 1/|y| over [0, 1] is int_0^1 sqrt(2/(pi s)) ds = 2 sqrt(2/pi)
  CHECK(exp_moment_bound(kernel::inv(3, SpacePoint{}), 1.0).G == Approx(2.0 * std::sqrt(2.0 / oracle::pi)).epsilon(1e-6));
}

TEST_CASE("Monte Carlo moment comparison") {
  oracle::Gen g(5);
  const auto x = g.normals(4000, 1.0);
  const std::vector<double> k{0.0, 1.0, 1.0, 0.0, 0.0};
  const auto cmp = mc_crosscheck_moments(x, k, 4, 9, 200);
  REQUIRE(cmp.size() == 4);
  for (const auto& c : cmp) CHECK(std::abs(c.z) < 4.0);
  CHECK(cmp[3].predicted == Approx(3.0));
  const std::vector<double> few(100, 1.0);
  CHECK_THROWS(mc_crosscheck_moments(few, k, 2));
}
