#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chameleon {

/// Upper bound on cluster size; process sets are 64-bit masks.
inline constexpr std::uint32_t kMaxProcesses = 64;

struct ProcessId {
  std::uint32_t value{};

  constexpr ProcessId() = default;
  constexpr explicit ProcessId(std::uint32_t v) : value(v) {}

  constexpr auto operator<=>(const ProcessId&) const = default;
};

/// "A".."Z" for the first 26 processes, "P26", "P27", ... afterwards.
std::string to_string(ProcessId p);

/// Accepts a letter name ("D") or a decimal id ("3"). Throws std::invalid_argument.
ProcessId parse_process(std::string_view text);

/// A set of processes, stored as a bitmask.
class ProcessSet {
 public:
  constexpr ProcessSet() = default;
  constexpr explicit ProcessSet(std::uint64_t bits) : bits_(bits) {}
  ProcessSet(std::initializer_list<ProcessId> members) {
    for (auto p : members) insert(p);
  }

  static constexpr ProcessSet all(std::uint32_t n) {
    return ProcessSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  void insert(ProcessId p) {
    if (p.value >= kMaxProcesses) throw std::invalid_argument("process id out of range: " + std::to_string(p.value));
    bits_ |= std::uint64_t{1} << p.value;
  }
  void erase(ProcessId p) {
    if (p.value < kMaxProcesses) bits_ &= ~(std::uint64_t{1} << p.value);
  }
  [[nodiscard]] constexpr bool contains(ProcessId p) const {
    return p.value < kMaxProcesses && ((bits_ >> p.value) & 1U) != 0;
  }
  [[nodiscard]] constexpr std::uint32_t size() const { return static_cast<std::uint32_t>(std::popcount(bits_)); }
  [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
  [[nodiscard]] constexpr std::uint64_t bits() const { return bits_; }
  [[nodiscard]] constexpr bool is_subset_of(ProcessSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Members in increasing id order.
  [[nodiscard]] std::vector<ProcessId> members() const;

  constexpr ProcessSet operator|(ProcessSet o) const { return ProcessSet(bits_ | o.bits_); }
  constexpr ProcessSet operator&(ProcessSet o) const { return ProcessSet(bits_ & o.bits_); }
  constexpr bool operator==(const ProcessSet&) const = default;

 private:
  std::uint64_t bits_{0};
};

/// Compares by sorted member-id sequence, e.g. {A,B,E} < {A,C,D} < {B}.
bool lexicographic_less(ProcessSet a, ProcessSet b);

/// "{A,D}"
std::string to_string(ProcessSet s);

/// A token is identified by the process that owns it and a rank among that owner's tokens.
struct Token {
  ProcessId owner;
  std::uint32_t rank{};

  constexpr auto operator<=>(const Token&) const = default;
};

/// "B.0"
std::string to_string(const Token& t);

/// Accepts "B.0", "1.0" or a bare owner "B" (rank 0).
Token parse_token(std::string_view text);

/// Size of a simple majority of n processes, ceil((n+1)/2).
constexpr std::uint32_t majority(std::uint32_t n) { return n / 2 + 1; }

}  // namespace chameleon

template <>
struct std::hash<chameleon::ProcessId> {
  std::size_t operator()(chameleon::ProcessId p) const noexcept { return std::hash<std::uint32_t>{}(p.value); }
};
