#include "doctest.h"
#include "oracles.hpp"

#include <map>

#include "sbm/localtime.hpp"
#include "sbm/particles.hpp"

using namespace sbm;
using doctest::Approx;

namespace {

SimConfig small(int dim = 3) {
  SimConfig c;
  c.dim = dim;
  c.particles_per_unit_mass = 50;
  c.initial = AtomicMeasure::delta(dim);
  c.horizon = TimeHorizon::finite(0.5);
  c.kernels = {kernel::mollified(dim, SpacePoint::on_axis(0.3), 0.05)};
  c.record_times = {0.1, 0.25};
  return c;
}

// P(line extinct after k steps) by propagating the full population law.
double extinction_by_population_law(double p, int steps) {
  std::map<int, double> law{{1, 1.0}};
  for (int k = 0; k < steps; ++k) {
    std::map<int, double> next;
    for (const auto& [n, pr] : law) {
      // each of n particles independently: 0 w.p. p/2, 1 w.p. 1-p, 2 w.p. p/2
      std::map<int, double> conv{{0, 1.0}};
      for (int i = 0; i < n; ++i) {
        std::map<int, double> c2;
        for (const auto& [m, q] : conv) {
          c2[m] += q * p / 2;
          c2[m + 1] += q * (1 - p);
          c2[m + 2] += q * p / 2;
        }
        conv = std::move(c2);
      }
      for (const auto& [m, q] : conv) next[m] += pr * q;
    }
    law = std::move(next);
  }
  return law[0];
}

}  // namespace

TEST_CASE("same seed, same path; different seed, different path") {
  auto c = small();
  c.seed = 5;
  const auto a = simulate(c), b = simulate(c);
  CHECK(a.hash() == b.hash());
  c.seed = 6;
  CHECK(simulate(c).hash() != a.hash());
}

TEST_CASE("replicates do not depend on the worker count") {
  const auto c = small();
  auto run = [&](unsigned w) {
    return run_replicates(8, w, [&](std::size_t i) {
      SimConfig k = c;
      k.seed = 100 + i;
      return simulate(k).hash();
    });
  };
  CHECK(run(1) == run(3));
}

TEST_CASE("config validation") {
  auto c = small();
  c.particles_per_unit_mass = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.dim = 4;
  CHECK_THROWS(c.validate());
  c = small();
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("step divides the horizon and defaults to 1/(4N)") {
  auto c = small();
  CHECK(c.step() <= 1.0 / (4.0 * 50) + 1e-15);
  const double k = c.horizon.t / c.step();
  CHECK(k == Approx(std::round(k)).epsilon(1e-12));
}

TEST_CASE("count-only mode without spatial kernels") {
  SimConfig c;
  CHECK(c.count_only());
  c.kernels = {kernel::constant(3, 1.0)};
  CHECK(c.count_only());
  c.kernels.push_back(kernel::phi(SpacePoint{}));
  CHECK_FALSE(c.count_only());
}

TEST_CASE("path invariants: nonnegative mass, nondecreasing occupation, absorbed at zero") {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto c = small();
    c.seed = s;
    const auto p = simulate(c);
    REQUIRE(p.times.size() == p.mass.size());
    bool dead = false;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      CHECK(p.mass[i] >= 0.0);
      if (dead) CHECK(p.mass[i] == 0.0);
      dead = dead || p.mass[i] == 0.0;
      if (i) {
        CHECK(p.mass_occupation[i] >= p.mass_occupation[i - 1]);
        CHECK(p.traces[0].occupation[i] >= p.traces[0].occupation[i - 1]);
      }
    }
    CHECK(p.extinct == (p.mass.back() == 0.0));
  }
}

TEST_CASE("unregistered kernel trace is an error") {
  const auto p = simulate(small());
  CHECK_THROWS(p.trace(kernel::phi(SpacePoint{})));
  CHECK_THROWS(estimate_local_time(p, SpacePoint::on_axis(0.3), 0.01));
  CHECK(estimate_local_time(p, SpacePoint::on_axis(0.3), 0.05, 0.0).value == 0.0);
}

TEST_CASE("population cap raises") {
  auto c = small();
  c.particles_per_unit_mass = 200;
  c.population_cap = 50;
  CHECK_THROWS_AS(simulate(c), SimulationError);
}

TEST_CASE("discrete extinction recursion against the population law") {
  for (double p : {0.1, 0.25, 0.6}) {
    for (int k : {1, 2, 4, 6}) {
      CHECK(discrete_extinction_probability(p, static_cast<std::uint64_t>(k)) ==
            Approx(extinction_by_population_law(p, k)).epsilon(1e-12));
    }
  }
  CHECK(discrete_population_extinction(3, 0.25, 4) ==
        Approx(std::pow(extinction_by_population_law(0.25, 4), 3)).epsilon(1e-12));
  CHECK(sbm_extinction_probability(1.0, 1.0) == Approx(std::exp(-2.0)));
  CHECK_THROWS_AS(discrete_extinction_probability(1.5, 3), DomainError);
}

TEST_CASE("discrete survival approaches the continuum law") {
  const std::size_t N = 400;
  const double dt = 1.0 / (4.0 * N);
  const double disc = discrete_population_extinction(N, N * dt, static_cast<std::uint64_t>(1.0 / dt));
  CHECK(disc == Approx(std::exp(-2.0)).epsilon(5e-3));
}

TEST_CASE("cluster sampling requires a long enough horizon") {
  auto c = small();
  c.record_times.clear();
  c.horizon = TimeHorizon::finite(0.05);
  CHECK_THROWS_AS(sample_cluster(c, SpacePoint{}, 0.1), ConfigError);
  c.horizon = TimeHorizon::finite(0.2);
  c.record_times = {0.1};
  const auto s = sample_cluster(c, SpacePoint{}, 0.1);
  CHECK(s.attempts >= 1);
  CHECK(s.path.mass[s.path.time_index(0.1)] > 0.0);
}

TEST_CASE("infinite horizon runs to extinction or the cap") {
  SimConfig c;
  c.particles_per_unit_mass = 20;
  c.horizon = TimeHorizon::forever();
  c.t_cap = 5.0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    c.seed = s;
    const auto p = simulate(c);
    CHECK((p.extinct || p.censored));
    if (p.censored) CHECK(p.times.back() == Approx(5.0));
  }
}

TEST_CASE("mean mass is one (small-sample z check)") {
  SimConfig c;
  c.particles_per_unit_mass = 100;
  c.horizon = TimeHorizon::finite(1.0);
  const auto masses = run_replicates(300, 1, [&](std::size_t i) {
    SimConfig k = c;
    k.seed = 1000 + i;
    return simulate(k).mass.back();
  });
  double m = 0.0, v = 0.0;
  for (double x : masses) m += x;
  m /= masses.size();
  for (double x : masses) v += (x - m) * (x - m);
  v /= masses.size() - 1;
  CHECK(std::abs(m - 1.0) < 4.0 * std::sqrt(v / masses.size()));
}
