// One PASS/FAIL line per primary acceptance criterion. Every tolerance and
// grid below is pinned here and passed to the experiments explicitly, so a
// change of library defaults cannot loosen a check silently.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sbm/experiments.hpp"

namespace {

using Json = nlohmann::ordered_json;
using sbm::Criterion;
using sbm::ExperimentReport;

constexpr std::uint64_t kSeed = 20240601;
constexpr double kZ = 3.0;

// Pinned parameter sets.
const std::map<std::string, Json>& pinned() {
  static const std::map<std::string, Json> p{
      {"kernel_suite",
       {{"identity_points", {3, 1, 0.5, 3, 1, 0.1, 2, 1, 0.3, 2, 0.5, 0.1}}, {"identity_tol", 1e-6}}},
      {"cumulant_xcheck",
       {{"t", 1.0}, {"n_max", 6}, {"monte_carlo", true}, {"replicates", 400}, {"z_max", kZ}}},
      {"pde_asymptotics",
       {{"lambda", 1.0},
        {"r_min", 1e-6},
        {"first_order_r", 1e-5},
        {"first_order_lo", 0.97},
        {"first_order_hi", 1.03},
        {"scaling_tol", 0.005},
        {"ratio_r", 1e-4},
        {"ratio_lo", -1.3},
        {"ratio_hi", -0.7},
        {"trend_radii", {1e-2, 1e-3, 1e-4}}}},
      {"mass_calibration", {{"N", 2000}, {"replicates", 400}, {"times", {0.5, 1.0, 2.0}}, {"z_max", kZ}}},
      {"localtime_mean", {{"z_max", kZ}}},
      {"tanaka", {{"z_max", kZ}}},
      {"renorm_d3", {{"slope_lo", 0.5}, {"slope_hi", 2.0}, {"radii", {0.2, 0.1, 0.05, 0.02}}}},
      {"renorm_d2", Json::object()},
      {"rate", {{"alphas", {0.25, 0.5, 0.99}}}},
      {"bad_point", Json::object()},
      {"laplace_xcheck", {{"x_norms", {0.5, 0.3}}, {"lambdas", {0.5, 1.0}}, {"z_max", kZ}}},
  };
  return p;
}

// Experiments run at most once per process.
const ExperimentReport& report(const std::string& id) {
  static std::map<std::string, ExperimentReport> cache;
  if (auto it = cache.find(id); it != cache.end()) return it->second;
  Json cfg = Json::parse(sbm::default_config(id));
  cfg["seed"] = kSeed;
  for (auto it = pinned().at(id).begin(); it != pinned().at(id).end(); ++it) cfg["params"][it.key()] = it.value();
  auto out = sbm::run_experiment(cfg.dump());
  return cache.emplace(id, std::move(out.report)).first->second;
}

struct Outcome {
  bool ok = true;
  std::vector<std::string> failed;
  std::vector<std::string> info;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failed.push_back(what);
    }
  }
  // Criterion flag plus, when given, a pinned bound on its reported value.
  void criterion(const ExperimentReport& r, const std::string& name,
                 const std::function<bool(double)>& value_ok = nullptr) {
    const Criterion* c = nullptr;
    for (const auto& k : r.criteria) {
      if (k.name == name) c = &k;
    }
    if (!c) {
      need(false, r.experiment + "." + name + " missing");
      return;
    }
    need(c->passed && (!value_ok || value_ok(c->value)), r.experiment + "." + name + " (" + c->detail + ")");
  }
  void prefix(const ExperimentReport& r, const std::string& p, const std::function<bool(double)>& value_ok = nullptr) {
    int n = 0;
    for (const auto& k : r.criteria) {
      if (k.name.rfind(p, 0) == 0) {
        criterion(r, k.name, value_ok);
        ++n;
      }
    }
    need(n > 0, r.experiment + "." + p + "* missing");
  }
  void runtime(const ExperimentReport& r, double limit) {
    need(r.runtime_seconds < limit, r.experiment + " runtime " + std::to_string(r.runtime_seconds) + " s >= " +
                                        std::to_string(limit) + " s");
    info.push_back(r.experiment + " " + std::to_string(static_cast<int>(std::round(r.runtime_seconds))) + "s");
  }
};

const auto z_ok = [](double z) { return std::abs(z) <= kZ; };

Outcome mean_identities() {
  Outcome o;
  const auto& r = report("kernel_suite");
  o.criterion(r, "mean_identities", [](double v) { return v < 1e-6; });
  o.runtime(r, 30.0);
  return o;
}

Outcome kernel_inequalities() {
  Outcome o;
  const auto& r = report("kernel_suite");
  o.criterion(r, "kernel_bounds_grid");
  o.criterion(r, "bessel_origin_value");
  o.criterion(r, "bessel_origin_envelope", [](double v) { return v <= std::sqrt(3.0); });
  o.runtime(r, 60.0);
  return o;
}

Outcome cumulant_closed_forms() {
  Outcome o;
  const auto& r = report("cumulant_xcheck");
  o.criterion(r, "catalan_exact");
  // Literal 30-term requirement; the exact tail at 0.2 is 3.5e-6, so this
  // cannot hold. The 40-term gate is reported alongside.
  o.criterion(r, "generating_function_30_terms", [](double v) { return v < 1e-6; });
  o.criterion(r, "generating_function", [](double v) { return v < 1e-6; });
  o.criterion(r, "const_v2_closed_form", [](double v) { return v < 1e-10; });
  o.criterion(r, "const_v3_closed_form", [](double v) { return v < 1e-10; });
  o.criterion(r, "growth_bound", [](double v) { return v <= 1.0; });
  return o;
}

Outcome pde() {
  Outcome o;
  const auto& r = report("pde_asymptotics");
  o.criterion(r, "converged");
  o.criterion(r, "first_order_ratio", [](double v) { return v >= 0.97 && v <= 1.03; });
  o.criterion(r, "scaling_covariance", [](double v) { return v <= 0.005; });
  o.criterion(r, "second_order_bracket", [](double v) { return v >= -1.3 && v <= -0.7; });
  o.criterion(r, "second_order_trend");
  o.runtime(r, 120.0);
  return o;
}

Outcome mass_calibration() {
  Outcome o;
  const auto& r = report("mass_calibration");
  for (const char* p : {"mass_mean", "mass_variance", "survival"}) o.prefix(r, p, z_ok);
  o.runtime(r, 600.0);
  return o;
}

Outcome occupation_moments() {
  Outcome o;
  const auto& r = report("cumulant_xcheck");
  o.criterion(r, "var_occupation_const", z_ok);
  o.criterion(r, "var_occupation_inv", z_ok);
  return o;
}

Outcome localtime_mean() {
  Outcome o;
  const auto& r = report("localtime_mean");
  o.prefix(r, "mean_d", z_ok);
  o.prefix(r, "bias_monotone");
  return o;
}

Outcome tanaka_martingale() {
  Outcome o;
  const auto& r = report("tanaka");
  o.criterion(r, "martingale_mean_d3", z_ok);
  o.criterion(r, "martingale_mean_d2", z_ok);
  return o;
}

Outcome trend_suite() {
  Outcome o;
  const auto& d3 = report("renorm_d3");
  o.criterion(d3, "variance_slope", [](double v) { return v >= 0.5 && v <= 2.0; });
  o.criterion(d3, "skewness_shrinks");
  o.criterion(d3, "kurtosis_shrinks");
  o.criterion(report("tanaka"), "qv_ratio_trend");
  o.criterion(report("renorm_d2"), "paired_stabilisation");
  o.prefix(report("rate"), "envelope_decay_a");
  o.criterion(report("bad_point"), "blowup_frequency_decreasing");
  return o;
}

Outcome laplace() {
  Outcome o;
  const auto& r = report("laplace_xcheck");
  o.prefix(r, "laplace_x", z_ok);
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> c{
      {"mean_identities", mean_identities},
      {"kernel_inequalities", kernel_inequalities},
      {"cumulant_closed_forms", cumulant_closed_forms},
      {"pde", pde},
      {"mass_calibration", mass_calibration},
      {"occupation_moments", occupation_moments},
      {"localtime_mean", localtime_mean},
      {"tanaka_martingale", tanaka_martingale},
      {"trend_suite", trend_suite},
      {"laplace", laplace},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primary acceptance criteria"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Run only these criteria");
  bool list = false;
  app.add_flag("--list", list, "List criterion names");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& [name, fn] : criteria()) std::printf("%s\n", name.c_str());
    return 0;
  }
  for (const auto& name : only) {
    bool known = false;
    for (const auto& c : criteria()) known = known || c.first == name;
    if (!known) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 3;
    }
  }

  int failures = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.need(false, std::string("error: ") + e.what());
    }
    std::string detail;
    for (const auto& s : o.info) detail += (detail.empty() ? "" : ", ") + s;
    std::printf("%s %-22s %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    for (const auto& f : o.failed) std::printf("       not met: %s\n", f.c_str());
    std::fflush(stdout);
    failures += o.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
