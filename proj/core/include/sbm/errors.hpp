#pragma once

#include <stdexcept>
#include <string>

namespace sbm {

// Argument outside the mathematical domain of a function (t <= 0, bad dim, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// An adaptive routine could not reach the requested tolerance.
struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (maps to CLI exit code 3).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime failure inside a simulation (population cap, singular hit, ...).
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sbm
