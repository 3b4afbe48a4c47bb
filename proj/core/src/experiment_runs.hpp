#pragma once

// Internal: parameter access and report assembly shared by the experiment
// implementations and the orchestrator.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbm/experiments.hpp"

namespace sbm::detail {

using Json = nlohmann::ordered_json;

class RunContext {
 public:
  RunContext(const Json& params, std::uint64_t seed, unsigned workers, ExperimentOutput& out)
      : params_(params), seed_(seed), workers_(workers), out_(out) {}

  double num(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // positive integer
  bool flag(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;

  std::uint64_t seed() const { return seed_; }
  // Independent seed for a named sub-stream (bootstrap, permutation, ...).
  std::uint64_t stream_seed(std::uint64_t stream) const;
  unsigned workers() const { return workers_; }

  void stat(const std::string& name, double value);
  void sample(const std::string& name, std::uint64_t n);
  void note(const std::string& text);
  bool check(const std::string& name, Tier tier, bool passed, double value, const std::string& detail);
  // |z| <= z_max against a target.
  bool check_z(const std::string& name, Tier tier, double estimate, double target, double se, double z_max);
  io::CsvTable& table(const std::string& stem, std::vector<std::string> header);

 private:
  const Json& at(const std::string& key) const;

  const Json& params_;
  std::uint64_t seed_;
  unsigned workers_;
  ExperimentOutput& out_;
};

using RunFn = void (*)(RunContext&);

struct Registered {
  ExperimentInfo info;
  const char* defaults;  // JSON object text of the params block
  RunFn run;
};

const std::vector<Registered>& registry();

}  // namespace sbm::detail
