#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "chameleon/history.hpp"

namespace chameleon {

struct LinOptions {
  /// Exact search is exponential in concurrency; keys with more operations are refused.
  std::size_t max_ops_per_key{4096};
};

class HistoryTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinVerdict {
  bool ok{true};
  /// Key of the first non-linearizable sub-history, when !ok.
  std::string key;
  /// An inclusion-minimal non-linearizable sub-history (removing any one op makes it linearizable).
  History counterexample;
  std::string message;
};

/// Exact linearizability check of a key-value history against a register per key.
///
/// Operations without a response are treated as possibly effected: a pending put may be
/// linearized anywhere after its invocation or dropped; a pending get is ignored.
/// Throws HistoryTooLarge when a key exceeds options.max_ops_per_key.
LinVerdict check_linearizable(const History& history, const LinOptions& options = {});

struct OracleVerdict {
  bool ok{true};
  std::optional<HistoryEvent> write;
  std::optional<HistoryEvent> read;
  std::size_t reads_checked{0};
  std::string message;
};

/// For every completed write w and completed read r with response(w) < invoke(r), checks that
/// r was assigned a log index at least w's. Keys are not considered: the log is shared.
/// Throws std::invalid_argument when a completed operation lacks its assigned index.
OracleVerdict check_read_index_oracle(const History& history);

}  // namespace chameleon
