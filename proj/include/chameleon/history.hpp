#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chameleon/types.hpp"

namespace chameleon {

/// A point in simulated time. `seq` orders records that share a tick.
struct Stamp {
  std::uint64_t time{};
  std::uint64_t seq{};

  constexpr auto operator<=>(const Stamp&) const = default;
};

enum class OpKind { put, get };

std::string_view to_string(OpKind k);

/// One client operation: invocation, optional response, and the log index it was assigned.
struct HistoryEvent {
  std::uint64_t op_id{};
  OpKind kind{OpKind::get};
  std::string key;
  /// Value written by a put, or returned by a get (nullopt: key absent).
  std::optional<std::string> value;
  ProcessId origin;
  Stamp invoke;
  std::optional<Stamp> response;
  std::optional<std::uint64_t> assigned_index;

  [[nodiscard]] bool complete() const { return response.has_value(); }
  bool operator==(const HistoryEvent&) const = default;
};

using History = std::vector<HistoryEvent>;

/// Thrown on malformed history records; `line` is 1-based.
class HistoryFormatError : public std::runtime_error {
 public:
  HistoryFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One JSON object per line with a fixed field order:
/// op_id, kind, key, value, origin, invoke_time, invoke_seq, response_time, response_seq, assigned_index.
void write_history(std::ostream& out, const History& history);
History read_history(std::istream& in);

std::string describe(const HistoryEvent& e);

}  // namespace chameleon
