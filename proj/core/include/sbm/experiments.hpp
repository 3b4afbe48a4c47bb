#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbm/io.hpp"

namespace sbm {

// pass: hard gate; trend: logarithmic-rate limit, checked as a direction;
// diagnostic: reported only.
enum class Tier { Pass, Trend, Diagnostic };
std::string tier_name(Tier t);

struct Criterion {
  std::string name;
  Tier tier = Tier::Pass;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  std::string claim;
  std::string config_hash;
  std::string config_json;  // canonical, as hashed
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<std::pair<std::string, std::uint64_t>> sample_sizes;
  std::vector<std::pair<std::string, double>> statistics;
  std::vector<std::string> notes;
  std::vector<Criterion> criteria;
  std::string started_at;
  std::string finished_at;
  double runtime_seconds = 0.0;

  bool pass_tier_ok() const;
  bool all_ok() const;
  const Criterion& criterion(const std::string& name) const;
  double statistic(const std::string& name) const;
  std::string to_json() const;
};

struct ExperimentOutput {
  ExperimentReport report;
  std::deque<std::pair<std::string, io::CsvTable>> tables;  // file stem -> table; deque keeps references stable

  const io::CsvTable& table(const std::string& stem) const;
};

struct ExperimentInfo {
  std::string id;
  std::string claim;
  std::string description;
  bool monte_carlo = false;
};
const std::vector<ExperimentInfo>& registered_experiments();

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  // Parameter overrides as a JSON object text merged into "params".
  std::optional<std::string> params_json;
};

// Default configuration (JSON text) for an experiment id.
std::string default_config(const std::string& id);

// Parse, validate against the experiment's parameter schema, run. Throws
// ConfigError for unknown experiments, unknown keys, wrong types or schema
// versions.
ExperimentOutput run_experiment(const std::string& config_json, const RunOverrides& overrides = {});

// outdir/<experiment>/<confighash>/{report.json, config.json, constants.json, *.csv}, each written atomically.
std::filesystem::path write_outputs(const ExperimentOutput& out, const std::filesystem::path& outdir);

// 0 when every pass-tier criterion holds, 2 otherwise.
int exit_code(const ExperimentReport& report);

// Rebuild a summary JSON from the CSVs and report in an output directory
// without recomputing anything.
std::string rerender_report(const std::filesystem::path& run_dir);

inline constexpr int kSchemaVersion = 1;

}  // namespace sbm
