#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chameleon/lin_check.hpp"
#include "chameleon/simulator.hpp"

namespace chameleon::report {

struct LatencyStats {
  std::size_t count{0};
  double mean{0};
  double median{0};
  /// Nearest-rank percentile.
  std::uint64_t p99{0};
};

LatencyStats latency_stats(std::vector<std::uint64_t> samples);

struct Epoch {
  std::string config;
  /// The epoch starts when its configuration became fully acknowledged (0 for the initial one).
  std::uint64_t start_time{0};
  LatencyStats reads;
  LatencyStats writes;
};

/// Completed operations grouped by the configuration in force when they were invoked.
std::vector<Epoch> epochs(const sim::Scenario& scenario, const sim::RunResult& result);

struct Verdicts {
  bool complete{false};
  std::string incomplete_reason;
  std::optional<LinVerdict> linearizability;
  std::optional<OracleVerdict> oracle;
  std::string lin_error;
  std::string oracle_error;
  std::vector<std::string> invariant_violations;

  [[nodiscard]] bool ok() const;
};

Verdicts evaluate(const sim::Scenario& scenario, const sim::RunResult& result);

void write_ops_csv(std::ostream& out, const sim::RunResult& result);
void write_trace_csv(std::ostream& out, const sim::RunResult& result);
void write_summary(std::ostream& out, const sim::Scenario& scenario, const sim::RunResult& result);
void write_verdicts(std::ostream& out, const Verdicts& verdicts);

}  // namespace chameleon::report
