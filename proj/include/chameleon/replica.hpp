#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chameleon/message.hpp"
#include "chameleon/token_quorum.hpp"

namespace chameleon {

enum class ReadFanout {
  closest,    ///< READ goes to the closest read quorum only
  broadcast,  ///< READ goes to every process
};

struct ReplicaOptions {
  ReadFanout fanout{ReadFanout::closest};
};

/// One Chameleon process as a deterministic message-driven state machine.
///
/// Every entry point consumes one event and returns the messages to send and the notices
/// raised. Messages addressed to the replica itself must be delivered back to it by the
/// driver (the simulator does so with zero latency). The leader is fixed for the lifetime
/// of the cluster.
class Replica {
 public:
  Replica(ProcessId self, ProcessId leader, TokenConfiguration initial, LatencyMatrix latency,
          ReplicaOptions options = {});

  /// Client-facing operations. The returned counter identifies the operation in later notices.
  std::pair<std::uint64_t, Effects> client_write(Put op);
  std::pair<std::uint64_t, Effects> client_read(Get op);

  /// Administrative request to switch the token configuration (leader only).
  Effects propose_config(const TokenConfiguration& next);

  Effects handle(ProcessId from, const Message& m);

  [[nodiscard]] ProcessId id() const { return self_; }
  [[nodiscard]] ProcessId leader() const { return leader_; }
  [[nodiscard]] std::uint32_t cluster_size() const { return n_; }
  [[nodiscard]] std::uint64_t max_prepare() const { return max_prepare_; }
  [[nodiscard]] std::uint64_t applied_up_to() const { return applied_up_to_; }
  [[nodiscard]] const TokenSet& held_tokens() const { return held_tokens_; }
  [[nodiscard]] const TokenConfiguration& config() const { return config_; }
  [[nodiscard]] bool config_valid() const { return config_valid_; }
  [[nodiscard]] std::uint64_t op_counter() const { return op_counter_; }
  [[nodiscard]] const std::map<std::string, std::string>& kv() const { return kv_; }
  /// Entries applied so far, in index order.
  [[nodiscard]] const std::vector<LogEntry>& applied_log() const { return applied_log_; }
  [[nodiscard]] bool reconfiguring() const { return reconfig_.has_value(); }
  [[nodiscard]] std::size_t pending_write_count() const { return pending_writes_.size(); }
  [[nodiscard]] std::size_t stalled_count() const { return stalled_.size(); }
  /// P_ACKs the leader ignored because their config version did not match the write's.
  [[nodiscard]] std::uint64_t mismatched_acks() const { return mismatched_acks_; }

 private:
  struct PendingWrite {
    AppWrite write;
    std::uint64_t config_version{};
    ProcessSet acks;
    TokenSet returned;
  };

  struct PendingRead {
    Get op;
    ProcessSet targets;
    ProcessSet responded;
    ProcessSet covered;
    ProcessSet counted;
    std::set<std::uint64_t> counted_versions;
    std::uint64_t best_index{0};
    std::uint64_t best_version{0};
    std::uint32_t rounds{1};
    std::optional<std::uint64_t> fixed_index;
  };

  struct Reconfig {
    TokenConfiguration next;
    std::optional<std::uint64_t> index;
    ProcessSet acks;
  };

  struct StalledMessage {
    ProcessId from;
    Message message;
  };
  struct StalledRead {
    std::uint64_t counter{};
    Get op;
  };
  using Stalled = std::variant<StalledMessage, StalledRead>;

  using ClientKey = std::pair<ProcessId, std::uint64_t>;
  struct WriteStatus {
    std::uint64_t index{0};  // 0 while queued behind a reconfiguration
    bool done{false};
  };

  void dispatch(ProcessId from, const Message& m, Effects& out);

  // write path
  void on_write(ProcessId from, const msg::Write& m, Effects& out);
  void assign_write(ProcessId client, const msg::Write& m, Effects& out);
  void on_prepare(ProcessId from, const msg::Prepare& m, Effects& out);
  void on_prepare_ack(ProcessId from, const msg::PrepareAck& m, Effects& out);
  void on_commit(ProcessId from, const msg::Commit& m, Effects& out);
  void on_write_ack(const msg::WriteAck& m, Effects& out);
  void apply_committed(Effects& out);

  // read path
  void start_read(std::uint64_t counter, Get op, Effects& out);
  void on_read(ProcessId from, const msg::Read& m, Effects& out);
  void on_read_ack(ProcessId from, const msg::ReadAck& m, Effects& out);
  void fix_read_index(std::uint64_t counter, PendingRead& read, bool local, Effects& out);
  void execute_ready_reads(Effects& out);

  // reconfiguration (reconfig.cpp)
  void maybe_issue_config(Effects& out);
  void on_prepare_config(ProcessId from, const msg::Prepare& m, Effects& out);
  void on_config_ack(ProcessId from, const msg::PrepareAck& m, Effects& out);
  void adopt_config(const TokenConfiguration& next, Effects& out);
  void replay_stalled(Effects& out);

  void send_all(const Message& m, Effects& out) const;
  [[nodiscard]] bool is_leader() const { return self_ == leader_; }
  [[nodiscard]] ProcessSet read_quorum();

  ProcessId self_;
  ProcessId leader_;
  std::uint32_t n_;
  LatencyMatrix latency_;
  ReplicaOptions options_;

  // replica state
  std::map<std::uint64_t, Payload> log_;
  std::map<std::uint64_t, Payload> committed_;  // committed, not yet applied
  std::vector<LogEntry> applied_log_;
  std::uint64_t max_prepare_{0};
  std::uint64_t applied_up_to_{0};
  TokenConfiguration config_;
  TokenSet held_tokens_;
  bool config_valid_{true};
  std::optional<std::uint64_t> pending_config_index_;
  std::deque<Stalled> stalled_;
  std::map<std::string, std::string> kv_;
  std::set<ClientKey> applied_ops_;
  std::optional<std::pair<std::uint64_t, ProcessSet>> quorum_cache_;

  // client state
  std::uint64_t op_counter_{0};
  std::set<std::uint64_t> pending_client_writes_;
  std::map<std::uint64_t, PendingRead> pending_reads_;
  std::multimap<std::uint64_t, std::uint64_t> reads_awaiting_apply_;  // read index -> counter

  // leader state
  std::uint64_t last_index_{0};
  std::map<std::uint64_t, PendingWrite> pending_writes_;
  std::map<ClientKey, WriteStatus> write_status_;
  std::deque<std::pair<ProcessId, msg::Write>> queued_writes_;
  std::optional<Reconfig> reconfig_;
  std::uint64_t mismatched_acks_{0};
};

}  // namespace chameleon
