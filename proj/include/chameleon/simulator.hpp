#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chameleon/config_spec.hpp"
#include "chameleon/history.hpp"
#include "chameleon/replica.hpp"
#include "chameleon/token_quorum.hpp"

namespace chameleon::sim {

/// Network misbehaviour. Loss and duplication are drawn per transmission from a stream keyed by
/// the transmission's sequence number, so the same seed always yields the same fates.
struct FaultProfile {
  double drop_rate{0.0};
  double duplicate_rate{0.0};
  /// Extra delay drawn uniformly from [0, reorder_jitter] ticks per delivery.
  std::uint64_t reorder_jitter{0};
  bool retransmit{false};
  /// Retransmission period; 0 picks max rtt + 2 * jitter + 1.
  std::uint64_t retransmit_timeout{0};
  std::uint64_t rng_seed{1};
};

struct ScriptedOp {
  std::uint64_t time{};
  ProcessId origin;
  OpKind kind{OpKind::get};
  std::string key;
  std::string value;
};

struct Workload {
  std::uint64_t total_ops{0};
  double read_ratio{0.5};
  std::uint32_t key_space{8};
  /// Relative share of operations submitted at each process; empty means uniform.
  std::vector<double> placement;
  std::uint64_t start_time{0};
  std::uint64_t interarrival_min{1};
  std::uint64_t interarrival_max{10};
  /// When non-empty, replaces the generated operations.
  std::vector<ScriptedOp> script;
};

struct PlannedOp {
  std::uint64_t op_id{};
  std::uint64_t time{};
  ProcessId origin;
  OpKind kind{OpKind::get};
  std::string key;
  std::string value;
};

/// Deterministic in (workload, n, seed). Puts write unique values "v<op_id>".
std::vector<PlannedOp> generate_workload(const Workload& workload, std::uint32_t n, std::uint64_t seed);

struct ScheduledReconfig {
  std::uint64_t time{};
  ConfigSpec spec;
};

struct Checks {
  bool oracle{true};
  bool linearizability{true};
  std::size_t lin_bound{4096};
};

struct Scenario {
  std::string name{"scenario"};
  std::uint32_t n{3};
  ProcessId leader{0};
  LatencyMatrix latency;
  FaultProfile faults;
  ConfigSpec initial;
  std::vector<ScheduledReconfig> schedule;
  Workload workload;
  Checks checks;
  ReadFanout fanout{ReadFanout::closest};
  std::uint64_t time_budget{50'000'000};

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

struct OpMetrics {
  std::uint64_t op_id{};
  OpKind kind{OpKind::get};
  std::string key;
  ProcessId origin;
  std::uint64_t counter{};
  Stamp invoke;
  std::optional<Stamp> response;
  /// Write: leader assigned the index. Read: read index fixed.
  std::optional<Stamp> index_stamp;
  std::optional<std::uint64_t> assigned_index;
  std::optional<std::string> value;
  /// Network transmissions attributed to the op (retransmissions included, self-deliveries not).
  std::uint64_t messages_sent{0};
  /// Writes: P_ACK senders at the moment the write committed.
  std::uint32_t acks_at_commit{0};
  /// Writes: WRITE_ACK received back at the origin.
  std::optional<Stamp> client_ack;
  /// Reads: configuration versions of the acks whose tokens were counted.
  std::vector<std::uint64_t> counted_versions;
  std::uint64_t read_config_version{0};
  bool local_read{false};
  std::uint32_t read_rounds{0};

  [[nodiscard]] std::optional<std::uint64_t> latency() const {
    if (!response) return std::nullopt;
    return response->time - invoke.time;
  }
};

struct ReconfigRecord {
  std::uint64_t scheduled_time{};
  std::string spec;
  Stamp triggered;
  std::optional<Stamp> proposed;
  std::optional<std::uint64_t> index;
  std::optional<Stamp> fully_acked;
  std::optional<std::string> rejected;
};

struct TraceRecord {
  std::uint64_t seq{};
  std::uint64_t time{};
  std::string_view event;  // deliver, drop, retransmit, invoke, reconfig, adopt
  ProcessId source;
  ProcessId target;
  std::string_view kind;
  std::uint64_t index{};
};

struct RunResult {
  bool complete{false};
  std::string incomplete_reason;
  std::uint64_t end_time{0};
  History history;
  std::vector<OpMetrics> ops;
  std::vector<ReconfigRecord> reconfigs;
  std::vector<TraceRecord> trace;
  std::map<std::string, std::uint64_t> messages_by_kind;
  std::uint64_t config_messages{0};
  /// Network READ messages received, per target process.
  std::vector<std::uint64_t> read_targets;
  /// Replica-level invariant breaches detected while running (monotonicity, agreement).
  std::vector<std::string> invariant_violations;
  std::uint64_t mismatched_acks{0};
};

RunResult run(const Scenario& scenario);

}  // namespace chameleon::sim
