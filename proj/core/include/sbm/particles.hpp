#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sbm/extended.hpp"
#include "sbm/kernels.hpp"
#include "sbm/measure.hpp"
#include "sbm/space.hpp"

namespace sbm {

enum class SingularityPolicy { Floor, Error };

// Box histogram of the occupation measure, used as a coarse estimator of
// sup_x L_t^x (cell occupation / cell volume).
struct OccupationGridSpec {
  SpacePoint center{};
  double half_width = 1.0;
  int cells_per_axis = 32;
};

// Discrete-time branching Brownian motion approximating super-Brownian motion:
// each unit of initial mass becomes N particles of mass 1/N, branching rate is
// N. Per step of length dt every particle takes a Gaussian step, then with
// probability N dt / 2 dies and with probability N dt / 2 splits in two.
struct SimConfig {
  int dim = 3;
  std::size_t particles_per_unit_mass = 1000;
  double dt = 0.0;  // 0 selects 1/(4N)
  TimeHorizon horizon = TimeHorizon::finite(1.0);
  double t_cap = 50.0;  // censoring time for the infinite horizon
  std::uint64_t seed = 1;
  AtomicMeasure initial = AtomicMeasure::delta(3);
  // Explicit starting particles (each of mass 1/N); overrides `initial`.
  std::vector<SpacePoint> initial_particles;
  std::vector<KernelDescriptor> kernels;
  std::vector<double> record_times;
  std::vector<double> snapshot_times;
  std::optional<OccupationGridSpec> grid;
  std::size_t population_cap = 20'000'000;
  SingularityPolicy policy = SingularityPolicy::Floor;

  double unit_mass() const { return 1.0 / static_cast<double>(particles_per_unit_mass); }
  double branching_rate() const { return static_cast<double>(particles_per_unit_mass); }
  // Resolved step: at most the requested dt (or 1/(4N)) and dividing the
  // finite horizon into a whole number of steps.
  double step() const;
  double end_time() const { return horizon.infinite ? t_cap : horizon.t; }
  bool count_only() const;
  void validate() const;
  std::string canonical() const;
  std::uint64_t hash() const;
};

struct KernelTrace {
  KernelDescriptor kernel;
  std::vector<double> value;       // X_t(phi) at each recorded time
  std::vector<double> occupation;  // int_0^t X_s(phi) ds (trapezoid) at each recorded time
  std::uint64_t singular_hits = 0;
};

struct Snapshot {
  double t = 0.0;
  std::vector<SpacePoint> positions;
};

struct PathRecord {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  int dim = 3;
  double unit_mass = 0.0;
  // Recorded times: the requested record times reached by the step grid, then
  // the final time (horizon, or extinction / censoring time when infinite).
  std::vector<double> times;
  std::vector<double> mass;            // X_t(1)
  std::vector<double> mass_occupation; // int_0^t X_s(1) ds
  std::vector<KernelTrace> traces;
  std::vector<Snapshot> snapshots;
  std::vector<double> grid_sup_density;  // per recorded time, when a grid is configured
  bool extinct = false;
  double extinction_time = 0.0;  // valid when extinct
  bool censored = false;         // infinite horizon hit t_cap
  std::uint64_t steps = 0;
  std::uint64_t peak_population = 0;

  std::size_t final_index() const { return times.size() - 1; }
  // Index of the recorded time closest to t.
  std::size_t time_index(double t) const;
  const KernelTrace& trace(const KernelDescriptor& k) const;
  std::uint64_t hash() const;
};

PathRecord simulate(const SimConfig& config);

// Canonical-measure cluster: one particle of mass 1/N at x0, kept only if it
// survives past delta. Acceptance is about 2/(N delta).
struct ClusterSample {
  PathRecord path;
  std::uint64_t attempts = 0;
};
ClusterSample sample_cluster(const SimConfig& base, const SpacePoint& x0, double delta,
                             std::uint64_t max_attempts = 1'000'000);

// Exact law of the discrete branching mechanism: probability that a single
// ancestor's line is extinct after `steps` steps with event probability p per
// step (offspring 0 w.p. p/2, 1 w.p. 1-p, 2 w.p. p/2).
double discrete_extinction_probability(double p, std::uint64_t steps);
// P(X_t(1) = 0) for N ancestors under the discrete mechanism.
double discrete_population_extinction(std::size_t n_ancestors, double p, std::uint64_t steps);
// Continuum limit P(zeta <= t) = exp(-2 m / t) for initial mass m.
double sbm_extinction_probability(double mass, double t);

// Run fn(i) for i in [0, n) over `workers` threads; results keep index order.
template <class Fn>
auto run_replicates(std::size_t n, unsigned workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace sbm
