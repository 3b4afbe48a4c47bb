#include <benchmark/benchmark.h>

#include "sbm/cumulants.hpp"
#include "sbm/kernels.hpp"
#include "sbm/particles.hpp"
#include "sbm/pde.hpp"

using namespace sbm;

// Count-only mode tracks population sizes, not positions. items = expected
// particle-steps, 4 N^2 t per path.
static void BM_SimulateCountOnly(benchmark::State& st) {
  SimConfig c;
  c.particles_per_unit_mass = static_cast<std::size_t>(st.range(0));
  c.horizon = TimeHorizon::finite(1.0);
  std::uint64_t seed = 1;
  for (auto _ : st) {
    c.seed = seed++;
    benchmark::DoNotOptimize(simulate(c).mass.back());
  }
  st.SetItemsProcessed(st.iterations() * 4 * st.range(0) * st.range(0));
}
BENCHMARK(BM_SimulateCountOnly)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SimulateWithKernels(benchmark::State& st) {
  SimConfig c;
  c.particles_per_unit_mass = 400;
  c.horizon = TimeHorizon::finite(1.0);
  const SpacePoint x = SpacePoint::on_axis(0.3);
  c.kernels = {kernel::mollified(3, x, 0.01), kernel::phi_smooth(x, 0.01), kernel::inv_sq(3, x)};
  std::uint64_t seed = 1;
  for (auto _ : st) {
    c.seed = seed++;
    benchmark::DoNotOptimize(simulate(c).mass.back());
  }
}
BENCHMARK(BM_SimulateWithKernels)->Unit(benchmark::kMillisecond);

static void BM_SmoothedQ(benchmark::State& st) {
  double r = 0.01;
  for (auto _ : st) {
    benchmark::DoNotOptimize(smoothed_q(3, 1.0, 0.01, r));
    r = r < 1.0 ? r * 1.01 : 0.01;
  }
}
BENCHMARK(BM_SmoothedQ);

static void BM_PotentialQuadrature(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(potential_q_by_quadrature(3, 1.0, 0.3));
}
BENCHMARK(BM_PotentialQuadrature);

static void BM_CumulantRecursion(benchmark::State& st) {
  CumulantOptions o;
  o.time_steps = static_cast<int>(st.range(0));
  o.radial_nodes = 64;
  for (auto _ : st) benchmark::DoNotOptimize(v_recursion(kernel::inv(3, SpacePoint{}), 1.0, 4, o).value(4, 0.5));
}
BENCHMARK(BM_CumulantRecursion)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_RadialSolve(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(solve_radial(1.0, 1e-6, 10.0, static_cast<int>(st.range(0))).residual);
}
BENCHMARK(BM_RadialSolve)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
