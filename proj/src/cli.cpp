#include "chameleon/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "chameleon/config_spec.hpp"
#include "chameleon/lin_check.hpp"
#include "chameleon/report.hpp"
#include "chameleon/scenario_io.hpp"

namespace chameleon::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void print_sets(std::ostream& out, const char* title, const std::vector<ProcessSet>& sets) {
  out << title << " (" << sets.size() << "):";
  for (const auto& s : sets) out << ' ' << to_string(s);
  out << '\n';
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  sim::Scenario scenario;
  try {
    scenario = sim::load_scenario(options.scenario_path);
  } catch (const sim::ScenarioError& e) {
    err << options.scenario_path << ": " << e.what() << '\n';
    return 2;
  }
  if (options.seed) scenario.faults.rng_seed = *options.seed;
  if (options.fanout) scenario.fanout = *options.fanout;

  const auto result = sim::run(scenario);
  const auto verdicts = report::evaluate(scenario, result);

  const std::filesystem::path dir(options.out_dir);
  try {
    std::filesystem::create_directories(dir);
    auto ops = open_out(dir / "ops.csv");
    report::write_ops_csv(ops, result);
    auto trace = open_out(dir / "trace.csv");
    report::write_trace_csv(trace, result);
    auto summary = open_out(dir / "summary.json");
    report::write_summary(summary, scenario, result);
    auto history = open_out(dir / "history.jsonl");
    write_history(history, result.history);
    auto verdict_file = open_out(dir / "verdicts.json");
    report::write_verdicts(verdict_file, verdicts);
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return 2;
  }

  out << scenario.name << " seed=" << scenario.faults.rng_seed << " ops=" << result.ops.size()
      << " end_time=" << result.end_time << '\n';
  if (!result.complete) out << "incomplete: " << result.incomplete_reason << '\n';
  for (const auto& v : verdicts.invariant_violations) out << "invariant violation: " << v << '\n';
  if (verdicts.linearizability) {
    out << "linearizability: " << (verdicts.linearizability->ok ? "ok" : verdicts.linearizability->message) << '\n';
  } else if (!verdicts.lin_error.empty()) {
    out << "linearizability: " << verdicts.lin_error << '\n';
  }
  if (verdicts.oracle) {
    out << "read-index oracle: " << (verdicts.oracle->ok ? "ok" : verdicts.oracle->message) << '\n';
  } else if (!verdicts.oracle_error.empty()) {
    out << "read-index oracle: " << verdicts.oracle_error << '\n';
  }
  out << "artifacts in " << dir.string() << '\n';
  return verdicts.ok() ? 0 : 1;
}

int cmd_quorums(const QuorumOptions& options, std::ostream& out, std::ostream& err) {
  try {
    ConfigSpec spec;
    spec.preset = parse_preset(options.preset);
    spec.n = options.n;
    spec.leader = parse_process(options.leader);
    for (const auto& t : options.transfers) spec.transfers.push_back(parse_transfer(t));
    if (spec.n > kMaxEnumerationSize) {
      throw Unsupported("enumeration supports n <= " + std::to_string(kMaxEnumerationSize));
    }
    const auto config = spec.build();
    out << spec.describe() << '\n';
    print_sets(out, "read quorums", minimal_read_quorums(config));
    print_sets(out, "write quorums", minimal_write_quorums(config));
    const bool ok = verify_intersection(config);
    out << "intersection: " << (ok ? "ok" : "VIOLATED") << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_check(const std::string& history_path, std::ostream& out, std::ostream& err) {
  History history;
  try {
    std::ifstream in(history_path);
    if (!in) throw std::runtime_error("cannot open " + history_path);
    history = read_history(in);
  } catch (const std::exception& e) {
    err << history_path << ": " << e.what() << '\n';
    return 2;
  }

  bool ok = true;
  try {
    const auto lin = check_linearizable(history);
    if (lin.ok) {
      out << "linearizability: ok (" << history.size() << " ops)\n";
    } else {
      ok = false;
      out << "linearizability: violation on key " << lin.key << ": " << lin.message << '\n';
      for (const auto& e : lin.counterexample) out << "  " << describe(e) << '\n';
    }
  } catch (const HistoryTooLarge& e) {
    err << e.what() << '\n';
    return 2;
  }

  const bool indexed = std::all_of(history.begin(), history.end(),
                                   [](const HistoryEvent& e) { return !e.complete() || e.assigned_index; });
  if (!indexed) {
    out << "read-index oracle: skipped (history lacks log indices)\n";
  } else {
    const auto oracle = check_read_index_oracle(history);
    if (oracle.ok) {
      out << "read-index oracle: ok (" << oracle.reads_checked << " reads)\n";
    } else {
      ok = false;
      out << "read-index oracle: " << oracle.message << '\n';
    }
  }
  return ok ? 0 : 1;
}

}  // namespace chameleon::cli
