#pragma once

#include <stdexcept>
#include <string>

#include "chameleon/simulator.hpp"

namespace chameleon::sim {

/// A scenario that failed to parse or validate. `line` is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses a YAML scenario document. Sections: cluster, faults, initial_config, schedule,
/// workload, checks; top-level keys name, seed, fanout, time_budget.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace chameleon::sim
