#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chameleon/replica.hpp"

namespace chameleon::cli {

struct RunOptions {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir{"out"};
  std::optional<ReadFanout> fanout;
};

/// Runs a scenario and writes ops.csv, trace.csv, summary.json, history.jsonl and verdicts.json
/// into the output directory. Returns 0 when the run completed and every verdict passed.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct QuorumOptions {
  std::string preset{"majority"};
  std::uint32_t n{3};
  std::string leader{"A"};
  std::vector<std::string> transfers;
};

int cmd_quorums(const QuorumOptions& options, std::ostream& out, std::ostream& err);

/// Re-checks a history file offline: linearizability, plus the read-index oracle when every
/// completed operation carries its log index.
int cmd_check(const std::string& history_path, std::ostream& out, std::ostream& err);

}  // namespace chameleon::cli
