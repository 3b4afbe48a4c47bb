#include "doctest.h"
#include "oracles.hpp"

#include "sbm/errors.hpp"
#include "sbm/pde.hpp"

using namespace sbm;
using doctest::Approx;

namespace {
const RadialSolution& base() {
  static const RadialSolution s = solve_radial(1.0, 1e-6, 10.0, 2000);
  return s;
}
}  // namespace

TEST_CASE("radial solve converges with the pole condition") {
  const auto& s = base();
  CHECK(s.residual < 1e-10);
  CHECK(s.W.front() == Approx(1.0 / (2.0 * oracle::pi)).epsilon(1e-12));
  for (std::size_t i = 1; i < s.V.size(); ++i) {
    CHECK(s.V[i] > 0.0);
    CHECK(s.V[i] < s.V[i - 1]);
  }
  // W'' = W^2 / r >= 0: discrete convexity in r
  for (std::size_t i = 1; i + 1 < s.r.size(); i += 97) {
    const double l = (s.W[i] - s.W[i - 1]) / (s.r[i] - s.r[i - 1]);
    const double r = (s.W[i + 1] - s.W[i]) / (s.r[i + 1] - s.r[i]);
    CHECK(r >= l - 1e-12);
  }
}

TEST_CASE("frozen values of the unit-lambda solution") {
  const auto& s = base();
  CHECK(second_order_ratio(s, 1e-4) == Approx(-1.1054).epsilon(2e-3));
  CHECK(s.V_at(0.5) == Approx(0.265709).epsilon(1e-4));
  CHECK(s.V_at(1e-5) * 1e-5 == Approx(1.0 / (2.0 * oracle::pi)).epsilon(1e-3));
}

TEST_CASE("second-order ratio moves toward -1 as r decreases") {
  const auto& s = base();
  const double a = std::abs(second_order_ratio(s, 1e-2) + 1.0);
  const double b = std::abs(second_order_ratio(s, 1e-4) + 1.0);
  CHECK(b < a);
  for (const auto& p : second_order_ratios(s)) CHECK(p.ratio < 0.0);
}

TEST_CASE("scaling: V_{2 lambda}(r/2) = 4 V_lambda(r)") {
  // V(r) solves the equation with source lambda; u(r) = 4 V(2 r) solves it with
  // source 2 lambda on the halved domain.
  const auto a = solve_radial(1.0, 1e-6, 10.0, 2000);
  const auto b = solve_radial(2.0, 0.5e-6, 5.0, 2000);
  for (double r : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) CHECK(b.V_at(r / 2.0) == Approx(4.0 * a.V_at(r)).epsilon(5e-3));
}

TEST_CASE("solver input validation") {
  CHECK_THROWS(solve_radial(1.0, 1e-6, 10.0, 100));
  CHECK_THROWS(solve_radial(-1.0, 1e-6, 10.0, 2000));
  CHECK_THROWS(solve_radial(1.0, 1.0, 0.5, 2000));
}

TEST_CASE("Laplace exponent estimator") {
  const std::vector<double> c(50, 2.0);
  const auto e = laplace_exponent(c, 0.5);
  CHECK(e.value == Approx(1.0).epsilon(1e-14));
  CHECK(e.se == Approx(0.0).epsilon(1e-14));
  // Jensen: -log E e^{-lambda L} <= lambda E L
  oracle::Gen g(21);
  std::vector<double> L(500);
  double mean = 0.0;
  for (auto& v : L) {
    v = g.uniform(0.0, 4.0);
    mean += v / L.size();
  }
  for (double lam : {0.1, 1.0, 3.0}) CHECK(laplace_exponent(L, lam).value <= lam * mean + 1e-12);
}
