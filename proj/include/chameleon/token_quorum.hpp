#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chameleon/types.hpp"

namespace chameleon {

using TokenSet = std::set<Token>;

/// Thrown when a token configuration breaks the "exactly one holder per token" rule.
class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by exhaustive enumeration on clusters that are too large.
class Unsupported : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Number of tokens owned by each process (every process owns at least one).
class OwnershipProfile {
 public:
  OwnershipProfile() = default;
  explicit OwnershipProfile(std::vector<std::uint32_t> counts);

  static OwnershipProfile uniform(std::uint32_t n, std::uint32_t tokens_each);

  [[nodiscard]] std::uint32_t size() const { return static_cast<std::uint32_t>(counts_.size()); }
  [[nodiscard]] std::uint32_t tokens_owned(ProcessId owner) const { return counts_.at(owner.value); }
  [[nodiscard]] std::uint32_t total_tokens() const;
  [[nodiscard]] const std::vector<std::uint32_t>& counts() const { return counts_; }
  /// Every token induced by the profile, ordered by (owner, rank).
  [[nodiscard]] std::vector<Token> tokens() const;
  [[nodiscard]] bool contains(const Token& t) const {
    return t.owner.value < size() && t.rank < counts_[t.owner.value];
  }

  bool operator==(const OwnershipProfile&) const = default;

 private:
  std::vector<std::uint32_t> counts_;
};

/// Total assignment of every token to exactly one holder, versioned by the log index
/// at which it was proposed (0 for the bootstrap configuration).
///
/// Instances are always valid: every constructor checks the holder map against the
/// profile and throws InvalidConfiguration otherwise.
class TokenConfiguration {
 public:
  /// holder[owner][rank] is the process holding token (owner, rank).
  TokenConfiguration(OwnershipProfile profile, std::vector<std::vector<ProcessId>> holder, std::uint64_t version = 0);

  /// Builds from an explicit token -> holder map; the map's domain must equal the profile's token set.
  static TokenConfiguration from_map(OwnershipProfile profile, const std::map<Token, ProcessId>& holders,
                                     std::uint64_t version = 0);

  [[nodiscard]] std::uint32_t size() const { return profile_.size(); }
  [[nodiscard]] const OwnershipProfile& profile() const { return profile_; }
  [[nodiscard]] std::uint64_t version() const { return version_; }
  [[nodiscard]] ProcessId holder(const Token& t) const;
  [[nodiscard]] TokenSet held_by(ProcessId p) const;
  [[nodiscard]] std::uint32_t held_count(ProcessId p) const;

  /// Same assignment, different version.
  [[nodiscard]] TokenConfiguration with_version(std::uint64_t version) const;

  /// Assignment equality, ignoring version.
  [[nodiscard]] bool same_assignment(const TokenConfiguration& other) const {
    return profile_ == other.profile_ && holder_ == other.holder_;
  }

  /// Processes holding at least one token of each owner, as one mask per owner.
  [[nodiscard]] const std::vector<ProcessSet>& holders_of_owner() const { return owner_holders_; }

 private:
  void validate_and_index();

  OwnershipProfile profile_;
  std::vector<std::vector<ProcessId>> holder_;
  std::uint64_t version_{0};
  std::vector<ProcessSet> owner_holders_;
};

/// Symmetric round-trip latencies in simulated ticks with a zero diagonal.
class LatencyMatrix {
 public:
  LatencyMatrix() = default;
  explicit LatencyMatrix(std::vector<std::vector<std::uint64_t>> rtt);

  static LatencyMatrix uniform(std::uint32_t n, std::uint64_t rtt);

  [[nodiscard]] std::uint32_t size() const { return static_cast<std::uint32_t>(rtt_.size()); }
  [[nodiscard]] std::uint64_t rtt(ProcessId a, ProcessId b) const { return rtt_.at(a.value).at(b.value); }
  /// One-way delay: half the round trip, rounded up.
  [[nodiscard]] std::uint64_t one_way(ProcessId a, ProcessId b) const { return (rtt(a, b) + 1) / 2; }

 private:
  std::vector<std::vector<std::uint64_t>> rtt_;
};

/// Owners with at least one token held by a member of s.
[[nodiscard]] ProcessSet owners_touched(const TokenConfiguration& config, ProcessSet s);
/// Owners all of whose tokens are held by members of s.
[[nodiscard]] ProcessSet owners_covered(const TokenConfiguration& config, ProcessSet s);

[[nodiscard]] bool is_read_quorum(const TokenConfiguration& config, ProcessSet s);
[[nodiscard]] bool is_write_quorum(const TokenConfiguration& config, ProcessSet s);

// Configurations that reproduce the classical read algorithms.
[[nodiscard]] TokenConfiguration mimic_leader(std::uint32_t n, ProcessId leader);
[[nodiscard]] TokenConfiguration mimic_majority(std::uint32_t n);
[[nodiscard]] TokenConfiguration mimic_flexible(std::uint32_t n, const std::vector<std::pair<Token, ProcessId>>& transfers);
[[nodiscard]] TokenConfiguration mimic_local(std::uint32_t n);

/// The read quorum an origin should contact: minimal max-rtt, then fewest members, then
/// lexicographically smallest. When the origin holds tokens, only quorums containing it qualify.
[[nodiscard]] ProcessSet closest_read_quorum(const TokenConfiguration& config, ProcessId origin,
                                             const LatencyMatrix& latency);

/// Largest cluster for which exhaustive enumeration is offered.
inline constexpr std::uint32_t kMaxEnumerationSize = 12;

/// Inclusion-minimal quorums, sorted lexicographically. Throws Unsupported above kMaxEnumerationSize.
[[nodiscard]] std::vector<ProcessSet> minimal_read_quorums(const TokenConfiguration& config);
[[nodiscard]] std::vector<ProcessSet> minimal_write_quorums(const TokenConfiguration& config);

/// Every minimal read quorum shares, with every minimal write quorum, a process holding a token
/// that counts toward the reader's coverage and belongs to an owner the writer fully covers.
[[nodiscard]] bool verify_intersection(const TokenConfiguration& config);

}  // namespace chameleon
