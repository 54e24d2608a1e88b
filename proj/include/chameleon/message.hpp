#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chameleon/token_quorum.hpp"
#include "chameleon/types.hpp"

namespace chameleon {

/// put(key, value) on the replicated key-value store.
struct Put {
  std::string key;
  std::string value;
};

/// get(key); returns nullopt for a key that was never written.
struct Get {
  std::string key;
};

/// An application write as stored in the log, tagged with the submitting client.
struct AppWrite {
  ProcessId client;
  std::uint64_t counter{};
  Put op;
};

/// A token configuration entry; its version equals the log index it occupies.
struct ConfigEntry {
  TokenConfiguration config;
};

using Payload = std::variant<AppWrite, ConfigEntry>;

struct LogEntry {
  std::uint64_t index{};
  Payload payload;
};

namespace msg {

struct Write {
  Put op;
  std::uint64_t counter{};
};

struct WriteAck {
  std::uint64_t counter{};
};

struct Prepare {
  std::uint64_t index{};
  Payload payload;
};

struct PrepareAck {
  std::uint64_t index{};
  TokenSet tokens;
  std::uint64_t config_version{};
};

struct Commit {
  std::uint64_t index{};
  Payload payload;
};

/// Acknowledges a COMMIT; only used to stop retransmission.
struct CommitAck {
  std::uint64_t index{};
};

struct Read {
  std::uint64_t counter{};
};

struct ReadAck {
  std::uint64_t counter{};
  TokenSet tokens;
  std::uint64_t max_prepare{};
  std::uint64_t config_version{};
};

}  // namespace msg

using Message = std::variant<msg::Write, msg::WriteAck, msg::Prepare, msg::PrepareAck, msg::Commit, msg::CommitAck,
                             msg::Read, msg::ReadAck>;

/// WRITE, WRITE_ACK, PREPARE, P_ACK, COMMIT, C_ACK, READ, R_ACK.
std::string_view kind_name(const Message& m);

/// Log index carried by PREPARE/P_ACK/COMMIT/C_ACK, 0 otherwise.
std::uint64_t log_index_of(const Message& m);

struct Outgoing {
  ProcessId to;
  Message message;
};

// Notices report protocol milestones to whoever drives the replica (the simulator, tests).

/// Leader assigned a log index to a client write.
struct WriteIndexAssigned {
  ProcessId client;
  std::uint64_t counter{};
  std::uint64_t index{};
};

/// Leader gathered a write quorum and emitted COMMIT + WRITE_ACK.
struct WriteCommitted {
  ProcessId client;
  std::uint64_t counter{};
  std::uint64_t index{};
  std::uint32_t acks{};
};

/// Client side: WRITE_ACK received.
struct WriteAcked {
  std::uint64_t counter{};
};

struct ReadIndexFixed {
  std::uint64_t counter{};
  std::uint64_t index{};
  std::uint64_t config_version{};
  /// Distinct config versions among the acks whose tokens were counted.
  std::vector<std::uint64_t> counted_versions;
  bool local{false};
  std::uint32_t rounds{};
};

struct ReadCompleted {
  std::uint64_t counter{};
  std::uint64_t index{};
  std::optional<std::string> value;
};

/// Leader accepted a reconfiguration request and stalled new writes.
struct ConfigTriggered {};
struct ConfigRejected {
  std::string reason;
};
/// Leader emitted PREPARE for the configuration entry.
struct ConfigProposed {
  std::uint64_t index{};
};
/// All n processes acknowledged the configuration entry; COMMIT emitted, writes resume.
struct ConfigFullyAcked {
  std::uint64_t index{};
};
struct ConfigAdopted {
  std::uint64_t version{};
};

using Notice = std::variant<WriteIndexAssigned, WriteCommitted, WriteAcked, ReadIndexFixed, ReadCompleted,
                            ConfigTriggered, ConfigRejected, ConfigProposed, ConfigFullyAcked, ConfigAdopted>;

struct Effects {
  std::vector<Outgoing> sends;
  std::vector<Notice> notices;

  void send(ProcessId to, Message m) { sends.push_back(Outgoing{to, std::move(m)}); }
  void notify(Notice n) { notices.push_back(std::move(n)); }
};

}  // namespace chameleon
