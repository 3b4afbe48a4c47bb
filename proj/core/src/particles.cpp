#include "sbm/particles.hpp"

#include <algorithm>
#include <array>
#include <boost/random/normal_distribution.hpp>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "sbm/cutoff.hpp"
#include "sbm/hash.hpp"
#include "sbm/rng.hpp"

namespace sbm {

namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double max_step(std::size_t n) { return 0.25 / static_cast<double>(n); }

}  // namespace

double SimConfig::step() const {
  const double want = dt > 0.0 ? dt : max_step(particles_per_unit_mass);
  if (horizon.infinite) return want;
  const double steps = std::ceil(horizon.t / want - 1e-9);
  return horizon.t / std::max(1.0, steps);
}

bool SimConfig::count_only() const {
  if (!snapshot_times.empty() || grid) return false;
  return std::none_of(kernels.begin(), kernels.end(), [](const auto& k) { return k.spatial(); });
}

void SimConfig::validate() const {
  require_dim(dim);
  if (particles_per_unit_mass == 0) throw ConfigError("N must be positive");
  if (dt < 0.0) throw ConfigError("dt must be non-negative");
  if (dt > max_step(particles_per_unit_mass) * (1.0 + 1e-12)) {
    throw ConfigError("dt must not exceed 1/(4N) (event probability per step <= 1/4)");
  }
  if (!horizon.infinite && !(horizon.t > 0.0)) throw ConfigError("horizon must be positive");
  if (horizon.infinite && !(t_cap > 0.0)) throw ConfigError("t_cap must be positive");
  if (initial_particles.empty()) {
    if (initial.size() == 0) throw ConfigError("initial measure is empty");
    if (initial.dim() != dim) throw ConfigError("initial measure dimension mismatch");
  }
  for (const auto& k : kernels) {
    if (k.spatial() && k.dim != dim) throw ConfigError("kernel dimension mismatch: " + k.name());
  }
  for (double t : record_times) {
    if (!(t > 0.0) || t > end_time() + 1e-12) throw ConfigError("record time outside (0, end]");
  }
  for (double t : snapshot_times) {
    if (t < 0.0 || t > end_time() + 1e-12) throw ConfigError("snapshot time outside [0, end]");
  }
  if (grid && (!(grid->half_width > 0.0) || grid->cells_per_axis < 1)) throw ConfigError("bad occupation grid");
}

std::string SimConfig::canonical() const {
  std::ostringstream os;
  os << "dim=" << dim << ";N=" << particles_per_unit_mass << ";dt=" << num(step())
     << ";horizon=" << (horizon.infinite ? std::string("inf") : num(horizon.t)) << ";t_cap=" << num(t_cap)
     << ";seed=" << seed << ";cap=" << population_cap << ";policy=" << static_cast<int>(policy);
  os << ";initial=";
  if (initial_particles.empty()) {
    for (std::size_t i = 0; i < initial.size(); ++i) {
      const auto& p = initial.points()[i];
      os << "(" << num(p[0]) << "," << num(p[1]) << "," << num(p[2]) << ":" << num(initial.masses()[i]) << ")";
    }
  } else {
    for (const auto& p : initial_particles) os << "[" << num(p[0]) << "," << num(p[1]) << "," << num(p[2]) << "]";
  }
  os << ";kernels=";
  for (const auto& k : kernels) {
    os << static_cast<int>(k.tag) << "/" << k.dim << "/" << num(k.center[0]) << "," << num(k.center[1]) << ","
       << num(k.center[2]) << "/" << num(k.param) << "/" << num(k.scale) << "|";
  }
  os << ";records=";
  for (double t : record_times) os << num(t) << ",";
  os << ";snapshots=";
  for (double t : snapshot_times) os << num(t) << ",";
  if (grid) {
    os << ";grid=" << num(grid->center[0]) << "," << num(grid->center[1]) << "," << num(grid->center[2]) << "/"
       << num(grid->half_width) << "/" << grid->cells_per_axis;
  }
  return os.str();
}

std::uint64_t SimConfig::hash() const { return Fnv1a{}.str(canonical()).value(); }

std::size_t PathRecord::time_index(double t) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

const KernelTrace& PathRecord::trace(const KernelDescriptor& k) const {
  for (const auto& tr : traces) {
    if (tr.kernel == k) return tr;
  }
  throw DomainError("kernel not registered: " + k.name());
}

std::uint64_t PathRecord::hash() const {
  Fnv1a h;
  h.u64(config_hash).u64(seed).f64s(times).f64s(mass).f64s(mass_occupation);
  for (const auto& tr : traces) h.f64s(tr.value).f64s(tr.occupation).u64(tr.singular_hits);
  for (const auto& s : snapshots) {
    h.f64(s.t);
    for (const auto& p : s.positions) h.f64(p[0]).f64(p[1]).f64(p[2]);
  }
  h.f64s(grid_sup_density).u64(extinct ? 1 : 0).f64(extinction_time).u64(censored ? 1 : 0);
  return h.value();
}

namespace {

struct Cloud {
  std::array<std::vector<double>, 3> x;
  std::size_t size() const { return x[0].size(); }
  void push(const SpacePoint& p) {
    for (int i = 0; i < 3; ++i) x[static_cast<std::size_t>(i)].push_back(p[static_cast<std::size_t>(i)]);
  }
  void copy_from(std::size_t i) {
    for (auto& c : x) c.push_back(c[i]);
  }
  void swap_remove(std::size_t i) {
    for (auto& c : x) {
      c[i] = c.back();
      c.pop_back();
    }
  }
  SpacePoint at(std::size_t i) const { return SpacePoint{{x[0][i], x[1][i], x[2][i]}}; }
};

// Sum over particles of phi(position); the kernel formula is selected once per
// call so the inner loop stays branch-free.
template <class F>
double sum_radial2(const Cloud& c, int dim, const SpacePoint& ctr, F&& f) {
  const std::size_t n = c.size();
  const double* x0 = c.x[0].data();
  const double* x1 = c.x[1].data();
  const double* x2 = c.x[2].data();
  double s = 0.0;
  if (dim == 3) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x0[i] - ctr[0], b = x1[i] - ctr[1], d = x2[i] - ctr[2];
      s += f(a * a + b * b + d * d);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x0[i] - ctr[0], b = x1[i] - ctr[1];
      s += f(a * a + b * b);
    }
  }
  return s;
}

double evaluate(const KernelDescriptor& k, const Cloud& c, double unit_mass, std::uint64_t& hits,
                SingularityPolicy policy) {
  if (c.size() == 0) return 0.0;
  const double floor2 = kSingularityFloor * kSingularityFloor;
  std::uint64_t local_hits = 0;
  auto clamp2 = [&](double r2) {
    if (r2 < floor2) {
      ++local_hits;
      return floor2;
    }
    return r2;
  };
  double s = 0.0;
  switch (k.tag) {
    case KernelTag::Const:
      s = k.param * static_cast<double>(c.size());
      break;
    case KernelTag::Heat:
    case KernelTag::Mollified: {
      const double inv2e = 1.0 / (2.0 * k.param);
      const double cut = 80.0 * k.param;  // exp(-40) relative to the peak
      const double pref = std::pow(2.0 * constants::pi * k.param, -0.5 * k.dim);
      s = pref * sum_radial2(c, k.dim, k.center, [&](double r2) { return r2 > cut ? 0.0 : std::exp(-r2 * inv2e); });
      break;
    }
    case KernelTag::Phi:
      s = constants::green3 * sum_radial2(c, k.dim, k.center, [&](double r2) { return 1.0 / std::sqrt(clamp2(r2)); });
      break;
    case KernelTag::Inv:
      s = sum_radial2(c, k.dim, k.center, [&](double r2) { return 1.0 / std::sqrt(clamp2(r2)); });
      break;
    case KernelTag::InvSq:
      s = sum_radial2(c, k.dim, k.center, [&](double r2) { return 1.0 / clamp2(r2); });
      break;
    case KernelTag::LogK:
      s = 0.5 * sum_radial2(c, k.dim, k.center, [&](double r2) { return std::log(clamp2(r2)); });
      break;
    case KernelTag::LogPlus:
      s = 0.5 * sum_radial2(c, k.dim, k.center, [&](double r2) { return r2 >= 1.0 ? 0.0 : -std::log(clamp2(r2)); });
      break;
    case KernelTag::GBar:
      s = sum_radial2(c, k.dim, k.center, [&](double r2) {
        const double r = std::sqrt(clamp2(r2));
        return r >= 1.0 ? 0.0 : std::log(r) * chi_half(r);
      });
      break;
    case KernelTag::PhiSmooth: {
      const double far2 = 72.0 * k.param;  // erf(6) == 1 in double precision
      s = constants::green3 * sum_radial2(c, k.dim, k.center, [&](double r2) {
            return r2 > far2 ? 1.0 / std::sqrt(r2) : smoothed_inverse3(k.param, std::sqrt(r2));
          });
      break;
    }
    case KernelTag::LogKSmooth: {
      const double far2 = 80.0 * k.param;  // E1(40) < 1e-19
      s = sum_radial2(c, k.dim, k.center, [&](double r2) {
        return r2 > far2 ? 0.5 * std::log(r2) : smoothed_log2(k.param, std::sqrt(r2));
      });
      break;
    }
  }
  if (local_hits > 0 && policy == SingularityPolicy::Error) {
    throw SimulationError("particle at the singularity of " + k.name());
  }
  hits += local_hits;
  return k.scale * unit_mass * s;
}

struct Schedule {
  std::vector<std::uint64_t> steps;
  std::size_t next = 0;
  bool due(std::uint64_t k) const { return next < steps.size() && steps[next] == k; }
};

Schedule make_schedule(const std::vector<double>& times, double dt) {
  Schedule s;
  for (double t : times) s.steps.push_back(static_cast<std::uint64_t>(std::llround(t / dt)));
  std::sort(s.steps.begin(), s.steps.end());
  s.steps.erase(std::unique(s.steps.begin(), s.steps.end()), s.steps.end());
  return s;
}

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg)
      : cfg_(cfg), rng_(cfg.seed), dt_(cfg.step()), unit_(cfg.unit_mass()), p_event_(cfg.branching_rate() * dt_) {
    rec_.seed = cfg.seed;
    rec_.config_hash = cfg.hash();
    rec_.dim = cfg.dim;
    rec_.unit_mass = unit_;
    for (const auto& k : cfg.kernels) rec_.traces.push_back(KernelTrace{k, {}, {}, 0});
    records_ = make_schedule(cfg.record_times, dt_);
    snaps_ = make_schedule(cfg.snapshot_times, dt_);
    const double end = cfg.end_time();
    last_step_ = static_cast<std::uint64_t>(std::llround(end / dt_));
    if (!cfg.horizon.infinite) last_step_ = std::max<std::uint64_t>(last_step_, 1);
    // record steps at or beyond the final step are covered by the final entry
    while (!records_.steps.empty() && records_.steps.back() >= last_step_) records_.steps.pop_back();
  }

  PathRecord run() {
    if (cfg_.count_only()) {
      run_counts();
    } else {
      run_particles();
    }
    return std::move(rec_);
  }

 private:
  void record(double t) {
    rec_.times.push_back(t);
    rec_.mass.push_back(unit_ * static_cast<double>(count_));
    rec_.mass_occupation.push_back(mass_occ_);
    for (std::size_t j = 0; j < rec_.traces.size(); ++j) {
      rec_.traces[j].value.push_back(current_[j]);
      rec_.traces[j].occupation.push_back(occ_[j]);
    }
    if (cfg_.grid) rec_.grid_sup_density.push_back(grid_sup());
  }

  // Remaining record times after extinction see X = 0 and frozen occupations.
  void finish(std::uint64_t k) {
    if (count_ == 0) {
      rec_.extinct = true;
      rec_.extinction_time = static_cast<double>(k) * dt_;
      std::fill(current_.begin(), current_.end(), 0.0);
      while (records_.next < records_.steps.size()) {
        record(static_cast<double>(records_.steps[records_.next]) * dt_);
        ++records_.next;
      }
    }
    rec_.steps = k;
    if (cfg_.horizon.infinite) {
      rec_.censored = count_ > 0;
      record(rec_.extinct ? rec_.extinction_time : static_cast<double>(k) * dt_);
    } else {
      record(cfg_.horizon.t);
    }
  }

  void accumulate(double mass_prev, const std::vector<double>& prev) {
    const double m = unit_ * static_cast<double>(count_);
    mass_occ_ += 0.5 * dt_ * (mass_prev + m);
    for (std::size_t j = 0; j < occ_.size(); ++j) occ_[j] += 0.5 * dt_ * (prev[j] + current_[j]);
  }

  void run_counts() {
    count_ = initial_count();
    current_.assign(cfg_.kernels.size(), 0.0);
    occ_.assign(cfg_.kernels.size(), 0.0);
    auto eval = [&] {
      for (std::size_t j = 0; j < current_.size(); ++j)
        current_[j] = cfg_.kernels[j].scale * cfg_.kernels[j].param * unit_ * static_cast<double>(count_);
    };
    eval();
    std::uint64_t k = 0;
    std::vector<double> prev;
    while (k < last_step_ && count_ > 0) {
      ++k;
      const double mass_prev = unit_ * static_cast<double>(count_);
      prev = current_;
      std::binomial_distribution<std::uint64_t> events(count_, p_event_);
      const std::uint64_t e = events(rng_);
      std::binomial_distribution<std::uint64_t> births(e, 0.5);
      const std::uint64_t b = births(rng_);
      count_ = count_ + b - (e - b);
      check_cap();
      eval();
      accumulate(mass_prev, prev);
      if (records_.due(k)) {
        record(static_cast<double>(k) * dt_);
        ++records_.next;
      }
    }
    rec_.peak_population = std::max<std::uint64_t>(rec_.peak_population, count_);
    finish(k);
  }

  void run_particles() {
    seed_particles();
    count_ = cloud_.size();
    current_.assign(cfg_.kernels.size(), 0.0);
    occ_.assign(cfg_.kernels.size(), 0.0);
    if (cfg_.grid) init_grid();
    evaluate_all();
    if (snaps_.due(0)) {
      take_snapshot(0.0);
      ++snaps_.next;
    }
    const double sd = std::sqrt(dt_);
    boost::random::normal_distribution<double> normal(0.0, sd);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double log_q = std::log1p(-p_event_);
    std::vector<std::size_t> deaths;
    std::vector<std::size_t> births;
    std::vector<double> prev;
    std::uint64_t k = 0;
    while (k < last_step_ && count_ > 0) {
      ++k;
      const double mass_prev = unit_ * static_cast<double>(count_);
      prev = current_;
      const std::size_t n = cloud_.size();
      for (int d = 0; d < cfg_.dim; ++d) {
        double* xs = cloud_.x[static_cast<std::size_t>(d)].data();
        for (std::size_t i = 0; i < n; ++i) xs[i] += normal(rng_);
      }
      // geometric skipping over particles: gaps between events are Geometric(p)
      deaths.clear();
      births.clear();
      auto gap = [&] { return static_cast<std::size_t>(std::floor(std::log(1.0 - unif(rng_)) / log_q)); };
      for (std::size_t i = gap(); i < n; i += 1 + gap()) {
        if (rng_() & 1ULL) {
          births.push_back(i);
        } else {
          deaths.push_back(i);
        }
      }
      for (std::size_t i : births) cloud_.copy_from(i);
      for (auto it = deaths.rbegin(); it != deaths.rend(); ++it) cloud_.swap_remove(*it);
      count_ = cloud_.size();
      check_cap();
      evaluate_all();
      accumulate(mass_prev, prev);
      if (cfg_.grid) deposit_grid();
      if (records_.due(k)) {
        record(static_cast<double>(k) * dt_);
        ++records_.next;
      }
      if (snaps_.due(k)) {
        take_snapshot(static_cast<double>(k) * dt_);
        ++snaps_.next;
      }
    }
    finish(k);
  }

  std::uint64_t initial_count() const {
    if (!cfg_.initial_particles.empty()) return cfg_.initial_particles.size();
    std::uint64_t n = 0;
    for (double m : cfg_.initial.masses()) n += static_cast<std::uint64_t>(std::llround(m * cfg_.branching_rate()));
    return n;
  }

  void seed_particles() {
    if (!cfg_.initial_particles.empty()) {
      for (const auto& p : cfg_.initial_particles) cloud_.push(p);
      return;
    }
    for (std::size_t a = 0; a < cfg_.initial.size(); ++a) {
      const auto n = std::llround(cfg_.initial.masses()[a] * cfg_.branching_rate());
      for (long long i = 0; i < n; ++i) cloud_.push(cfg_.initial.points()[a]);
    }
  }

  void evaluate_all() {
    for (std::size_t j = 0; j < cfg_.kernels.size(); ++j) {
      current_[j] = evaluate(cfg_.kernels[j], cloud_, unit_, rec_.traces[j].singular_hits, cfg_.policy);
    }
    rec_.peak_population = std::max<std::uint64_t>(rec_.peak_population, cloud_.size());
  }

  void check_cap() const {
    if (count_ > cfg_.population_cap) throw SimulationError("population cap exceeded");
  }

  void take_snapshot(double t) {
    Snapshot s{t, {}};
    s.positions.reserve(cloud_.size());
    for (std::size_t i = 0; i < cloud_.size(); ++i) s.positions.push_back(cloud_.at(i));
    rec_.snapshots.push_back(std::move(s));
  }

  void init_grid() {
    const auto m = static_cast<std::size_t>(cfg_.grid->cells_per_axis);
    grid_.assign(cfg_.dim == 3 ? m * m * m : m * m, 0.0);
    cell_ = 2.0 * cfg_.grid->half_width / static_cast<double>(m);
  }

  void deposit_grid() {
    const auto& g = *cfg_.grid;
    const auto m = static_cast<long>(g.cells_per_axis);
    const double w = unit_ * dt_;
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
      long idx = 0;
      bool inside = true;
      for (int d = 0; d < cfg_.dim; ++d) {
        const auto ud = static_cast<std::size_t>(d);
        const long c = static_cast<long>(std::floor((cloud_.x[ud][i] - g.center[ud] + g.half_width) / cell_));
        if (c < 0 || c >= m) {
          inside = false;
          break;
        }
        idx = idx * m + c;
      }
      if (inside) grid_[static_cast<std::size_t>(idx)] += w;
    }
  }

  double grid_sup() const {
    if (grid_.empty()) return 0.0;
    return *std::max_element(grid_.begin(), grid_.end()) / std::pow(cell_, cfg_.dim);
  }

  const SimConfig& cfg_;
  Engine rng_;
  double dt_;
  double unit_;
  double p_event_;
  PathRecord rec_;
  Schedule records_;
  Schedule snaps_;
  std::uint64_t last_step_ = 0;
  Cloud cloud_;
  std::uint64_t count_ = 0;
  std::vector<double> current_;
  std::vector<double> occ_;
  double mass_occ_ = 0.0;
  std::vector<double> grid_;
  double cell_ = 1.0;
};

}  // namespace

PathRecord simulate(const SimConfig& config) {
  config.validate();
  return Simulator(config).run();
}

ClusterSample sample_cluster(const SimConfig& base, const SpacePoint& x0, double delta, std::uint64_t max_attempts) {
  if (!(delta > 0.0)) throw DomainError("cluster survival threshold must be positive");
  if (!base.horizon.infinite && base.horizon.t < delta) throw ConfigError("horizon shorter than delta");
  SimConfig cfg = base;
  cfg.initial_particles = {x0};
  for (std::uint64_t a = 0; a < max_attempts; ++a) {
    cfg.seed = derive_seed(base.seed, 0xC1u, a);
    PathRecord p = simulate(cfg);
    if (!p.extinct || p.extinction_time > delta) return ClusterSample{std::move(p), a + 1};
  }
  throw SimulationError("no cluster survived past delta within the attempt budget");
}

double discrete_extinction_probability(double p, std::uint64_t steps) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("event probability must lie in [0, 1]");
  double s = 0.0;
  for (std::uint64_t k = 0; k < steps; ++k) s = 0.5 * p + (1.0 - p) * s + 0.5 * p * s * s;
  return s;
}

double discrete_population_extinction(std::size_t n_ancestors, double p, std::uint64_t steps) {
  return std::pow(discrete_extinction_probability(p, steps), static_cast<double>(n_ancestors));
}

double sbm_extinction_probability(double mass, double t) {
  if (!(t > 0.0)) throw DomainError("t must be positive");
  return std::exp(-2.0 * mass / t);
}

}  // namespace sbm
