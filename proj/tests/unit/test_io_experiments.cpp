#include "doctest.h"

#include <filesystem>
#include <unistd.h>

#include "json.hpp"

#include "sbm/errors.hpp"
#include "sbm/experiments.hpp"
#include "sbm/io.hpp"

using namespace sbm;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sbmlab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config(const std::string& id, const Json& params, std::uint64_t seed = 1, unsigned workers = 1) {
  Json c = Json::parse(default_config(id));
  c["seed"] = seed;
  c["workers"] = workers;
  for (auto it = params.begin(); it != params.end(); ++it) c["params"][it.key()] = it.value();
  return c.dump();
}

std::string error_of(const std::string& cfg) {
  try {
    run_experiment(cfg);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// A cheap Monte Carlo configuration.
const Json kSmallMass = {{"N", 50}, {"replicates", 40}, {"times", {0.5}}};

}  // namespace

TEST_CASE("csv round trip") {
  io::CsvTable t({"name", "x", "n"});
  t.add_row({std::string("a,b"), 0.1, std::int64_t{-3}});
  t.add_row({std::string("plain"), INFINITY, std::uint64_t{7}});
  CHECK_THROWS(t.add_row({1.0}));
  const auto dir = scratch("csv");
  io::write_atomic(dir / "t.csv", t.str());
  const auto r = io::read_csv(dir / "t.csv");
  CHECK(r.header() == t.header());
  REQUIRE(r.rows() == 2);
  CHECK(r.column("x")[0] == 0.1);
  CHECK(std::isinf(r.column("x")[1]));
  CHECK(r.column("n")[0] == -3.0);
  CHECK(std::get<std::string>(r.row(0)[0]) == "a,b");
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(NAN) == "nan");
}

TEST_CASE("constants json") {
  const auto j = Json::parse(io::constants_json());
  CHECK(j["c_d3"].get<double>() == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(j["pde_second_order_ratio_limit"].get<double>() == -1.0);
}

TEST_CASE("config errors name the offending key") {
  CHECK(error_of(config("kernel_suite", {{"no_such_key", 1}})).find("params.no_such_key") != std::string::npos);
  CHECK(error_of(config("kernel_suite", {{"identity_tol", "small"}})).find("identity_tol") != std::string::npos);
  CHECK(error_of(R"({"schema_version":1,"experiment":"nope","seed":1,"params":{}})").find("nope") != std::string::npos);
  CHECK(error_of(R"({"schema_version":9,"experiment":"kernel_suite","seed":1,"params":{}})") != "");
  CHECK(error_of(R"({"schema_version":1,"experiment":"kernel_suite","seed":1,"params":{},"extra":0})")
            .find("extra") != std::string::npos);
  CHECK(error_of("{not json") != "");
}

TEST_CASE("every registered experiment has a parseable default config") {
  for (const auto& e : registered_experiments()) {
    const auto j = Json::parse(default_config(e.id));
    CHECK(j["experiment"] == e.id);
    CHECK(j["params"].is_object());
  }
  CHECK(registered_experiments().size() >= 12);
}

TEST_CASE("config hash ignores workers and follows the seed") {
  const auto a = run_experiment(config("mass_calibration", kSmallMass, 3, 1));
  const auto b = run_experiment(config("mass_calibration", kSmallMass, 3, 2));
  const auto c = run_experiment(config("mass_calibration", kSmallMass, 4, 1));
  CHECK(a.report.config_hash == b.report.config_hash);
  CHECK(a.report.config_hash != c.report.config_hash);
  // results are identical across worker counts
  CHECK(a.table("mass").str() == b.table("mass").str());
  CHECK(a.table("mass").str() != c.table("mass").str());
}

TEST_CASE("kernel_suite passes and writes its artifacts") {
  const auto out = run_experiment(config("kernel_suite", Json::object()));
  CHECK(out.report.pass_tier_ok());
  CHECK(exit_code(out.report) == 0);
  const auto root = scratch("kernel_suite");
  const auto dir = write_outputs(out, root);
  CHECK(dir == root / "kernel_suite" / out.report.config_hash);
  for (const char* f : {"report.json", "config.json", "constants.json", "identities.csv", "kernel_bounds.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto rep = Json::parse(io::read_file(dir / "report.json"));
  CHECK(rep["verdict"] == "pass");
  CHECK(rep["config_hash"] == out.report.config_hash);
  const auto cfg = Json::parse(io::read_file(dir / "config.json"));
  CHECK(cfg.contains("workers"));

  const auto summary = Json::parse(rerender_report(dir));
  CHECK(summary["experiment"] == "kernel_suite");
  CHECK(summary.dump().find("identities") != std::string::npos);
}

TEST_CASE("a failing pass-tier criterion gives exit code 2") {
  const auto out = run_experiment(config("kernel_suite", {{"identity_tol", 1e-30}}));
  CHECK_FALSE(out.report.pass_tier_ok());
  CHECK(exit_code(out.report) == 2);
}

TEST_CASE("pde radial table carries the second-order ratio") {
  const auto out = run_experiment(config("pde_asymptotics", Json::object()));
  CHECK(out.report.pass_tier_ok());
  const auto& rad = out.table("radial");
  CHECK(rad.header() == std::vector<std::string>{"r", "V", "W", "ratio"});
  CHECK(rad.rows() == 2000);  // one row per grid node
}

TEST_CASE("deterministic experiments do not depend on the seed") {
  const auto a = run_experiment(config("pde_asymptotics", Json::object(), 1));
  const auto b = run_experiment(config("pde_asymptotics", Json::object(), 99));
  CHECK(a.table("radial").str() == b.table("radial").str());
}

TEST_CASE("overrides merge into params") {
  RunOverrides ov;
  ov.seed = 17;
  ov.params_json = R"({"N": 60})";
  const auto out = run_experiment(config("mass_calibration", kSmallMass), ov);
  CHECK(out.report.seed == 17);
  CHECK(Json::parse(out.report.config_json)["params"]["N"] == 60);
}
