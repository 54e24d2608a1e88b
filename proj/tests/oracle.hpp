#pragma once

// Brute-force reference implementations used to cross-check the library. They work from the
// raw holder table and never call the quorum predicates under test.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "chameleon/token_quorum.hpp"

namespace oracle {

using chameleon::ProcessId;
using chameleon::ProcessSet;
using chameleon::Token;

/// holder[owner][rank] = holding process.
using Table = std::vector<std::vector<std::uint32_t>>;

inline std::uint32_t maj(std::uint32_t n) { return (n + 2) / 2; }  // ceil((n+1)/2)

inline bool in(std::uint64_t mask, std::uint32_t p) { return (mask >> p) & 1U; }

inline bool read_ok(const Table& t, std::uint64_t mask) {
  std::uint32_t owners = 0;
  for (const auto& tokens : t) {
    if (std::any_of(tokens.begin(), tokens.end(), [&](auto h) { return in(mask, h); })) ++owners;
  }
  return owners >= maj(static_cast<std::uint32_t>(t.size()));
}

inline bool write_ok(const Table& t, std::uint64_t mask) {
  const auto n = static_cast<std::uint32_t>(t.size());
  if (static_cast<std::uint32_t>(__builtin_popcountll(mask)) < maj(n)) return false;
  std::uint32_t owners = 0;
  for (const auto& tokens : t) {
    if (std::all_of(tokens.begin(), tokens.end(), [&](auto h) { return in(mask, h); })) ++owners;
  }
  return owners >= maj(n);
}

template <typename Pred>
std::set<std::uint64_t> minimal(std::uint32_t n, Pred pred) {
  std::set<std::uint64_t> out;
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
    if (!pred(m)) continue;
    bool min = true;
    for (std::uint64_t sub = (m - 1) & m; sub; sub = (sub - 1) & m) {
      if (pred(sub)) {
        min = false;
        break;
      }
    }
    if (min) out.insert(m);
  }
  return out;
}

inline Table table_of(const chameleon::TokenConfiguration& c) {
  Table t(c.size());
  for (std::uint32_t o = 0; o < c.size(); ++o) {
    for (std::uint32_t r = 0; r < c.profile().tokens_owned(ProcessId{o}); ++r) {
      t[o].push_back(c.holder(Token{ProcessId{o}, r}).value);
    }
  }
  return t;
}

inline std::set<std::uint64_t> masks(const std::vector<ProcessSet>& sets) {
  std::set<std::uint64_t> out;
  for (auto s : sets) out.insert(s.bits());
  return out;
}

inline std::set<std::uint64_t> masks(std::initializer_list<std::initializer_list<std::uint32_t>> sets) {
  std::set<std::uint64_t> out;
  for (const auto& s : sets) {
    std::uint64_t m = 0;
    for (auto p : s) m |= std::uint64_t{1} << p;
    out.insert(m);
  }
  return out;
}

/// Every k-subset of {0..n-1}, optionally forced to contain `must`.
inline std::set<std::uint64_t> k_subsets(std::uint32_t n, std::uint32_t k, int must = -1) {
  std::set<std::uint64_t> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    if (static_cast<std::uint32_t>(__builtin_popcountll(m)) != k) continue;
    if (must >= 0 && !in(m, static_cast<std::uint32_t>(must))) continue;
    out.insert(m);
  }
  return out;
}

/// Closest read quorum by exhaustive search: (max rtt, size, sorted ids) over every read quorum,
/// restricted to quorums containing the origin when it holds a token.
inline std::uint64_t closest(const Table& t, std::uint32_t origin, const chameleon::LatencyMatrix& lat) {
  const auto n = static_cast<std::uint32_t>(t.size());
  bool origin_holds = false;
  for (const auto& tokens : t) origin_holds |= std::count(tokens.begin(), tokens.end(), origin) > 0;
  auto key = [&](std::uint64_t m) {
    std::uint64_t cost = 0;
    std::vector<std::uint32_t> ids;
    for (std::uint32_t p = 0; p < n; ++p) {
      if (!in(m, p)) continue;
      cost = std::max(cost, lat.rtt(ProcessId{origin}, ProcessId{p}));
      ids.push_back(p);
    }
    return std::tuple(cost, ids.size(), ids);
  };
  std::uint64_t best = 0;
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
    if (origin_holds && !in(m, origin)) continue;
    if (!read_ok(t, m)) continue;
    if (best == 0 || key(m) < key(best)) best = m;
  }
  return best;
}

/// A random valid configuration: 1..max_tokens tokens per owner, each held by a uniform process.
inline chameleon::TokenConfiguration random_config(std::mt19937_64& rng, std::uint32_t n,
                                                   std::uint32_t max_tokens = 3) {
  std::uniform_int_distribution<std::uint32_t> count(1, max_tokens), proc(0, n - 1);
  std::vector<std::uint32_t> counts(n);
  for (auto& c : counts) c = count(rng);
  std::vector<std::vector<ProcessId>> holder(n);
  for (std::uint32_t o = 0; o < n; ++o) {
    for (std::uint32_t r = 0; r < counts[o]; ++r) holder[o].push_back(ProcessId{proc(rng)});
  }
  return chameleon::TokenConfiguration(chameleon::OwnershipProfile(counts), holder);
}

inline chameleon::LatencyMatrix random_latency(std::mt19937_64& rng, std::uint32_t n) {
  std::uniform_int_distribution<std::uint64_t> d(1, 6);
  std::vector<std::vector<std::uint64_t>> m(n, std::vector<std::uint64_t>(n, 0));
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) m[a][b] = m[b][a] = 2 * d(rng);
  }
  return chameleon::LatencyMatrix(m);
}

}  // namespace oracle
