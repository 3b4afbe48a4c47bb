#include "sbm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include "experiment_runs.hpp"
#include "sbm/errors.hpp"
#include "sbm/hash.hpp"

#ifndef SBMLAB_VERSION
#define SBMLAB_VERSION "unknown"
#endif

namespace sbm {

using detail::Json;

std::string tier_name(Tier t) {
  switch (t) {
    case Tier::Pass:
      return "pass";
    case Tier::Trend:
      return "trend";
    case Tier::Diagnostic:
      return "diagnostic";
  }
  return "unknown";
}

bool ExperimentReport::pass_tier_ok() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const Criterion& c) { return c.tier != Tier::Pass || c.passed; });
}

bool ExperimentReport::all_ok() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const Criterion& c) { return c.tier == Tier::Diagnostic || c.passed; });
}

const Criterion& ExperimentReport::criterion(const std::string& name) const {
  for (const auto& c : criteria) {
    if (c.name == name) return c;
  }
  throw DomainError("report has no criterion " + name);
}

double ExperimentReport::statistic(const std::string& name) const {
  for (const auto& [k, v] : statistics) {
    if (k == name) return v;
  }
  throw DomainError("report has no statistic " + name);
}

namespace {

// JSON has no inf/nan; encode them as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

std::string verdict(const ExperimentReport& r) {
  if (!r.pass_tier_ok()) return "fail";
  return r.all_ok() ? "pass" : "pass (trend not met)";
}

}  // namespace

std::string ExperimentReport::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = experiment;
  j["claim"] = claim;
  j["version"] = SBMLAB_VERSION;
  j["config_hash"] = config_hash;
  j["config"] = Json::parse(config_json);
  j["seed"] = seed;
  j["workers"] = workers;
  j["verdict"] = verdict(*this);
  Json ss = Json::object();
  for (const auto& [k, v] : sample_sizes) ss[k] = v;
  j["sample_sizes"] = ss;
  Json st = Json::object();
  for (const auto& [k, v] : statistics) st[k] = number(v);
  j["statistics"] = st;
  Json cs = Json::array();
  for (const auto& c : criteria) {
    Json e;
    e["name"] = c.name;
    e["tier"] = tier_name(c.tier);
    e["passed"] = c.passed;
    e["value"] = number(c.value);
    e["detail"] = c.detail;
    cs.push_back(e);
  }
  j["criteria"] = cs;
  j["notes"] = notes;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["runtime_seconds"] = runtime_seconds;
  return j.dump(2) + "\n";
}

const io::CsvTable& ExperimentOutput::table(const std::string& stem) const {
  for (const auto& [s, t] : tables) {
    if (s == stem) return t;
  }
  throw DomainError("output has no table " + stem);
}

const std::vector<ExperimentInfo>& registered_experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& r : detail::registry()) v.push_back(r.info);
    return v;
  }();
  return infos;
}

namespace {

const detail::Registered& lookup(const std::string& id) {
  for (const auto& r : detail::registry()) {
    if (r.info.id == id) return r;
  }
  throw ConfigError("unknown experiment '" + id + "'");
}

Json parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlay `src` onto `params`; every key must exist in the defaults with the same kind.
void merge_params(Json& params, const Json& src, const std::string& id) {
  if (!src.is_object()) throw ConfigError("'params' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    auto d = params.find(it.key());
    if (d == params.end()) throw ConfigError("unknown key 'params." + it.key() + "' for experiment " + id);
    if (!same_kind(*d, it.value())) throw ConfigError("key 'params." + it.key() + "' has the wrong type");
    if (it.value().is_array()) {
      for (const auto& e : it.value()) {
        if (!e.is_number()) throw ConfigError("key 'params." + it.key() + "' must hold numbers");
      }
    }
    *d = it.value();
  }
}

std::uint64_t as_u64(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("key '" + key + "' must be a non-negative integer");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string default_config(const std::string& id) {
  const auto& r = lookup(id);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = id;
  j["seed"] = 1;
  j["workers"] = 1;
  j["params"] = Json::parse(r.defaults);
  return j.dump(2) + "\n";
}

ExperimentOutput run_experiment(const std::string& config_json, const RunOverrides& overrides) {
  const Json cfg = parse(config_json, "config");
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    static const char* known[] = {"schema_version", "experiment", "seed", "workers", "params"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown key '" + it.key() + "'");
    }
  }
  if (!cfg.contains("schema_version")) throw ConfigError("missing key 'schema_version'");
  if (as_u64(cfg["schema_version"], "schema_version") != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (!cfg.contains("experiment") || !cfg["experiment"].is_string()) {
    throw ConfigError("missing or non-string key 'experiment'");
  }
  const std::string id = cfg["experiment"].get<std::string>();
  const auto& reg = lookup(id);

  Json params = Json::parse(reg.defaults);
  if (cfg.contains("params")) merge_params(params, cfg["params"], id);
  if (overrides.params_json) merge_params(params, parse(*overrides.params_json, "parameter override"), id);

  std::uint64_t seed = cfg.contains("seed") ? as_u64(cfg["seed"], "seed") : 1;
  unsigned workers = cfg.contains("workers") ? static_cast<unsigned>(as_u64(cfg["workers"], "workers")) : 1;
  if (overrides.seed) seed = *overrides.seed;
  if (overrides.workers) workers = *overrides.workers;
  if (workers == 0) throw ConfigError("key 'workers' must be positive");

  // Results do not depend on the worker count, so it stays out of the hash.
  Json canon;
  canon["schema_version"] = kSchemaVersion;
  canon["experiment"] = id;
  canon["seed"] = seed;
  canon["params"] = params;

  ExperimentOutput out;
  auto& rep = out.report;
  rep.experiment = id;
  rep.claim = reg.info.claim;
  rep.config_json = canon.dump();
  rep.config_hash = hex64(Fnv1a{}.str(rep.config_json).value());
  rep.seed = seed;
  rep.workers = workers;
  rep.started_at = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  detail::RunContext ctx(params, seed, workers, out);
  reg.run(ctx);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.finished_at = utc_now();
  return out;
}

std::filesystem::path write_outputs(const ExperimentOutput& out, const std::filesystem::path& outdir) {
  const auto dir = outdir / out.report.experiment / out.report.config_hash;
  std::filesystem::create_directories(dir);
  for (const auto& [stem, t] : out.tables) io::write_atomic(dir / (stem + ".csv"), t.str());
  Json cfg = Json::parse(out.report.config_json);
  cfg["workers"] = out.report.workers;
  io::write_atomic(dir / "config.json", cfg.dump(2) + "\n");
  io::write_atomic(dir / "constants.json", io::constants_json());
  io::write_atomic(dir / "report.json", out.report.to_json());
  return dir;
}

int exit_code(const ExperimentReport& report) { return report.pass_tier_ok() ? 0 : 2; }

std::string rerender_report(const std::filesystem::path& run_dir) {
  const Json rep = parse(io::read_file(run_dir / "report.json"), "report.json");
  Json out;
  for (const char* k : {"experiment", "claim", "config_hash", "seed", "verdict"}) {
    if (!rep.contains(k)) throw ConfigError(std::string("report.json lacks '") + k + "'");
    out[k] = rep[k];
  }
  Json counts = Json::object();
  for (const char* tier : {"pass", "trend", "diagnostic"}) {
    int ok = 0, total = 0;
    for (const auto& c : rep["criteria"]) {
      if (c["tier"] == tier) {
        ++total;
        ok += c["passed"].get<bool>() ? 1 : 0;
      }
    }
    counts[tier] = {{"passed", ok}, {"total", total}};
  }
  out["criteria_summary"] = counts;
  Json failed = Json::array();
  for (const auto& c : rep["criteria"]) {
    if (!c["passed"].get<bool>()) failed.push_back(c["name"]);
  }
  out["not_met"] = failed;

  std::vector<std::filesystem::path> csvs;
  for (const auto& e : std::filesystem::directory_iterator(run_dir)) {
    if (e.path().extension() == ".csv") csvs.push_back(e.path());
  }
  std::sort(csvs.begin(), csvs.end());
  Json tables = Json::object();
  for (const auto& p : csvs) {
    const auto t = io::read_csv(p);
    Json tj;
    tj["rows"] = t.rows();
    Json cols = Json::object();
    for (const auto& h : t.header()) {
      try {
        const auto v = t.column(h);
        double s = 0.0;
        std::size_t n = 0;
        for (double x : v) {
          if (std::isfinite(x)) {
            s += x;
            ++n;
          }
        }
        cols[h] = number(n ? s / static_cast<double>(n) : NAN);
      } catch (const DomainError&) {
        cols[h] = "text";
      }
    }
    tj["column_means"] = cols;
    tables[p.stem().string()] = tj;
  }
  out["tables"] = tables;
  return out.dump(2) + "\n";
}

}  // namespace sbm
