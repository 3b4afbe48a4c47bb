#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sbm/errors.hpp"
#include "sbm/experiments.hpp"
#include "sbm/io.hpp"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitConfig = 3;

struct Common {
  std::string config;
  std::string experiment;
  std::string params;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string outdir;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--experiment", c.experiment, "Run an experiment with its default config");
  sub->add_option("--params", c.params, "JSON object merged into the config's params");
  sub->add_option("--seed", c.seed, "Master seed override");
  sub->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  sub->add_option("--outdir", c.outdir, "Artifact root (default: $OUTDIR or ./out)");
  sub->add_flag("--quiet", c.quiet, "Only the verdict line");
}

std::string outdir_of(const Common& c) {
  if (!c.outdir.empty()) return c.outdir;
  if (const char* env = std::getenv("OUTDIR"); env && *env) return env;
  return "out";
}

void print_report(const sbm::ExperimentReport& r, const std::string& dir, bool quiet) {
  if (!quiet) {
    for (const auto& c : r.criteria) {
      std::printf("  [%-10s] %-4s %-44s %s\n", sbm::tier_name(c.tier).c_str(), c.passed ? "ok" : "FAIL",
                  c.name.c_str(), c.detail.c_str());
    }
  }
  std::printf("%s %s (%.1f s) -> %s\n", r.experiment.c_str(), r.pass_tier_ok() ? "PASS" : "FAIL", r.runtime_seconds,
              dir.c_str());
}

int run_one(const std::string& config_text, const Common& c, const std::optional<std::string>& extra_params) {
  sbm::RunOverrides ov;
  ov.seed = c.seed;
  ov.workers = c.workers;
  if (extra_params) ov.params_json = extra_params;
  const auto out = sbm::run_experiment(config_text, ov);
  const auto dir = sbm::write_outputs(out, outdir_of(c));
  print_report(out.report, dir.string(), c.quiet);
  return sbm::exit_code(out.report);
}

std::string config_text(const Common& c, const std::string& fallback) {
  if (!c.config.empty()) return sbm::io::read_file(c.config);
  return sbm::default_config(c.experiment.empty() ? fallback : c.experiment);
}

// Combine --params with subcommand-specific flags into one override object.
std::optional<std::string> merged_params(const Common& c, const Json& extra) {
  Json p = Json::object();
  if (!c.params.empty()) {
    try {
      p = Json::parse(c.params);
    } catch (const Json::parse_error& e) {
      throw sbm::ConfigError(std::string("--params is not valid JSON: ") + e.what());
    }
    if (!p.is_object()) throw sbm::ConfigError("--params must be a JSON object");
  }
  for (auto it = extra.begin(); it != extra.end(); ++it) p[it.key()] = it.value();
  if (p.empty()) return std::nullopt;
  return p.dump();
}

// verify: {"schema_version": 1, "seed": s, "workers": w, "experiments": {id: {params...}, ...}}
int run_verify(const Common& c) {
  Json suite;
  if (!c.config.empty()) {
    try {
      suite = Json::parse(sbm::io::read_file(c.config));
    } catch (const Json::parse_error& e) {
      throw sbm::ConfigError(std::string("verify config is not valid JSON: ") + e.what());
    }
  } else {
    suite = {{"schema_version", sbm::kSchemaVersion},
             {"experiments",
              {{"kernel_suite", Json::object()},
               {"cumulant_xcheck", {{"monte_carlo", false}}},
               {"pde_asymptotics", Json::object()}}}};
  }
  if (!suite.is_object()) throw sbm::ConfigError("verify config must be an object");
  for (auto it = suite.begin(); it != suite.end(); ++it) {
    if (it.key() != "schema_version" && it.key() != "seed" && it.key() != "workers" && it.key() != "experiments") {
      throw sbm::ConfigError("unknown key '" + it.key() + "'");
    }
  }
  if (suite.value("schema_version", 0) != sbm::kSchemaVersion) throw sbm::ConfigError("unsupported schema_version");
  if (!suite.contains("experiments") || !suite["experiments"].is_object()) {
    throw sbm::ConfigError("missing object 'experiments'");
  }
  int worst = 0;
  for (auto it = suite["experiments"].begin(); it != suite["experiments"].end(); ++it) {
    Json cfg = Json::parse(sbm::default_config(it.key()));
    cfg["params"] = it.value();
    if (suite.contains("seed")) cfg["seed"] = suite["seed"];
    if (suite.contains("workers")) cfg["workers"] = suite["workers"];
    worst = std::max(worst, run_one(cfg.dump(), c, merged_params(c, Json::object())));
  }
  std::printf("verify %s\n", worst == 0 ? "PASS" : "FAIL");
  return worst;
}

int run_report(const std::vector<std::string>& dirs, bool quiet) {
  for (const auto& d : dirs) {
    const auto text = sbm::rerender_report(d);
    sbm::io::write_atomic(std::filesystem::path(d) / "summary.json", text);
    if (!quiet) std::fputs(text.c_str(), stdout);
  }
  return 0;
}

std::string experiment_list() {
  std::string s = "Experiments:\n";
  for (const auto& e : sbm::registered_experiments()) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-18s %s%s\n", e.id.c_str(), e.claim.c_str(), e.monte_carlo ? " [MC]" : "");
    s += buf;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-Brownian motion local-time simulation and verification lab"};
  app.footer(experiment_list());
  app.require_subcommand(1);

  Common common;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> runners{
      {"simulate", "Run a Monte Carlo experiment (default: mass_calibration)"},
      {"localtime", "Run a local-time experiment (default: localtime_mean)"},
      {"cumulants", "Run the cumulant recursion checks (default: cumulant_xcheck)"},
      {"pde", "Solve the radial Laplace-exponent PDE (default: pde_asymptotics)"},
      {"verify", "Deterministic suites: kernel_suite, cumulant closed forms, PDE invariants"},
  };
  for (const auto& [name, help] : runners) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], common);
  }
  std::optional<double> lambda, rmin, rmax;
  subs["pde"]->add_option("--lambda", lambda, "lambda");
  subs["pde"]->add_option("--rmin", rmin, "inner radius");
  subs["pde"]->add_option("--rmax", rmax, "outer radius");

  std::string config_id;
  auto* show = app.add_subcommand("config", "Print the default config of an experiment");
  show->add_option("experiment", config_id, "Experiment id")->required();

  std::vector<std::string> report_dirs;
  bool report_quiet = false;
  auto* report = app.add_subcommand("report", "Re-render summaries from existing run directories");
  report->add_option("run_dirs", report_dirs, "outdir/<experiment>/<hash> directories")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--quiet", report_quiet, "Write summary.json without printing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fputs(app.help().c_str(), stderr);
    return kExitConfig;
  }

  try {
    if (report->parsed()) return run_report(report_dirs, report_quiet);
    if (show->parsed()) {
      std::printf("%s\n", Json::parse(sbm::default_config(config_id)).dump(2).c_str());
      return 0;
    }
    if (subs["verify"]->parsed()) return run_verify(common);
    if (subs["simulate"]->parsed()) return run_one(config_text(common, "mass_calibration"), common, merged_params(common, Json::object()));
    if (subs["localtime"]->parsed()) return run_one(config_text(common, "localtime_mean"), common, merged_params(common, Json::object()));
    if (subs["cumulants"]->parsed()) return run_one(config_text(common, "cumulant_xcheck"), common, merged_params(common, Json::object()));
    if (subs["pde"]->parsed()) {
      Json extra = Json::object();
      if (lambda) extra["lambda"] = *lambda;
      if (rmin) extra["r_min"] = *rmin;
      if (rmax) extra["r_max"] = *rmax;
      return run_one(config_text(common, "pde_asymptotics"), common, merged_params(common, extra));
    }
  } catch (const sbm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitConfig;
}
