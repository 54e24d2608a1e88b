#include "chameleon/token_quorum.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

namespace chameleon {

namespace {

void check_members(const TokenConfiguration& config, ProcessSet s) {
  if (!s.is_subset_of(ProcessSet::all(config.size()))) {
    throw std::invalid_argument("process set " + to_string(s) + " names processes outside a cluster of " +
                                std::to_string(config.size()));
  }
}

void check_cluster_size(std::uint32_t n) {
  if (n == 0 || n > kMaxProcesses) {
    throw std::invalid_argument("cluster size must be in [1, " + std::to_string(kMaxProcesses) + "], got " +
                                std::to_string(n));
  }
}

std::vector<std::vector<ProcessId>> identity_holders(const OwnershipProfile& profile) {
  std::vector<std::vector<ProcessId>> holder(profile.size());
  for (std::uint32_t owner = 0; owner < profile.size(); ++owner) {
    holder[owner].assign(profile.counts()[owner], ProcessId(owner));
  }
  return holder;
}

template <typename Pred>
std::vector<ProcessSet> minimal_sets(std::uint32_t n, Pred pred) {
  if (n > kMaxEnumerationSize) {
    throw Unsupported("quorum enumeration supports at most " + std::to_string(kMaxEnumerationSize) +
                      " processes, got " + std::to_string(n));
  }
  std::vector<ProcessSet> out;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t bits = 1; bits < limit; ++bits) {
    ProcessSet s(bits);
    if (!pred(s)) continue;
    bool minimal = true;
    for (auto m : s.members()) {
      ProcessSet smaller = s;
      smaller.erase(m);
      if (pred(smaller)) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), lexicographic_less);
  return out;
}

// Smallest, then lexicographically first, subset of pool containing `required` that is a read quorum.
// Combinations of a fixed size are visited in lexicographic order, so the first hit wins.
std::optional<ProcessSet> smallest_quorum_within(const TokenConfiguration& config, const std::vector<ProcessId>& pool,
                                                 ProcessSet required) {
  const auto k_max = static_cast<std::uint32_t>(pool.size());
  for (std::uint32_t k = std::max<std::uint32_t>(1, required.size()); k <= k_max; ++k) {
    std::vector<std::uint32_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0U);
    while (true) {
      ProcessSet s;
      for (auto i : idx) s.insert(pool[i]);
      if (required.is_subset_of(s) && is_read_quorum(config, s)) return s;
      // next combination
      std::int64_t pos = static_cast<std::int64_t>(k) - 1;
      while (pos >= 0 && idx[pos] == k_max - k + static_cast<std::uint32_t>(pos)) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (auto j = static_cast<std::uint32_t>(pos) + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

ProcessSet greedy_quorum_within(const TokenConfiguration& config, const std::vector<ProcessId>& pool,
                                ProcessSet required, ProcessId origin, const LatencyMatrix& latency) {
  ProcessSet chosen = required;
  while (!is_read_quorum(config, chosen)) {
    const auto have = owners_touched(config, chosen).size();
    std::optional<ProcessId> best;
    std::uint32_t best_gain = 0;
    for (auto p : pool) {
      if (chosen.contains(p)) continue;
      ProcessSet with = chosen;
      with.insert(p);
      const auto gain = owners_touched(config, with).size() - have;
      if (!best || gain > best_gain ||
          (gain == best_gain && latency.rtt(origin, p) < latency.rtt(origin, *best))) {
        best = p;
        best_gain = gain;
      }
    }
    chosen.insert(*best);
  }
  // Drop members that are not needed, highest id first.
  auto members = chosen.members();
  for (auto it = members.rbegin(); it != members.rend(); ++it) {
    if (required.contains(*it)) continue;
    ProcessSet without = chosen;
    without.erase(*it);
    if (is_read_quorum(config, without)) chosen = without;
  }
  return chosen;
}

constexpr std::size_t kExactSearchLimit = 20;

}  // namespace

OwnershipProfile::OwnershipProfile(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  check_cluster_size(static_cast<std::uint32_t>(counts_.size()));
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0) {
      throw InvalidConfiguration("process " + to_string(ProcessId(static_cast<std::uint32_t>(i))) +
                                 " owns no tokens");
    }
  }
}

OwnershipProfile OwnershipProfile::uniform(std::uint32_t n, std::uint32_t tokens_each) {
  return OwnershipProfile(std::vector<std::uint32_t>(n, tokens_each));
}

std::uint32_t OwnershipProfile::total_tokens() const { return std::accumulate(counts_.begin(), counts_.end(), 0U); }

std::vector<Token> OwnershipProfile::tokens() const {
  std::vector<Token> out;
  out.reserve(total_tokens());
  for (std::uint32_t owner = 0; owner < size(); ++owner) {
    for (std::uint32_t rank = 0; rank < counts_[owner]; ++rank) out.push_back(Token{ProcessId(owner), rank});
  }
  return out;
}

TokenConfiguration::TokenConfiguration(OwnershipProfile profile, std::vector<std::vector<ProcessId>> holder,
                                       std::uint64_t version)
    : profile_(std::move(profile)), holder_(std::move(holder)), version_(version) {
  validate_and_index();
}

TokenConfiguration TokenConfiguration::from_map(OwnershipProfile profile, const std::map<Token, ProcessId>& holders,
                                                std::uint64_t version) {
  std::vector<std::vector<ProcessId>> holder(profile.size());
  for (const auto& [token, p] : holders) {
    if (!profile.contains(token)) {
      throw InvalidConfiguration("token " + to_string(token) + " is not owned under this profile");
    }
  }
  for (const auto& token : profile.tokens()) {
    auto it = holders.find(token);
    if (it == holders.end()) throw InvalidConfiguration("token " + to_string(token) + " has no holder");
    holder[token.owner.value].push_back(it->second);
  }
  return TokenConfiguration(std::move(profile), std::move(holder), version);
}

void TokenConfiguration::validate_and_index() {
  const auto n = profile_.size();
  if (holder_.size() != n) {
    throw InvalidConfiguration("holder table has " + std::to_string(holder_.size()) + " owners, profile has " +
                               std::to_string(n));
  }
  owner_holders_.assign(n, ProcessSet{});
  for (std::uint32_t owner = 0; owner < n; ++owner) {
    const auto owned = profile_.counts()[owner];
    if (holder_[owner].size() != owned) {
      throw InvalidConfiguration("owner " + to_string(ProcessId(owner)) + " owns " + std::to_string(owned) +
                                 " tokens but " + std::to_string(holder_[owner].size()) + " are assigned");
    }
    for (std::uint32_t rank = 0; rank < owned; ++rank) {
      const auto h = holder_[owner][rank];
      if (h.value >= n) {
        throw InvalidConfiguration("token " + to_string(Token{ProcessId(owner), rank}) +
                                   " is held by unknown process " + std::to_string(h.value));
      }
      owner_holders_[owner].insert(h);
    }
  }
}

ProcessId TokenConfiguration::holder(const Token& t) const {
  if (!profile_.contains(t)) throw std::invalid_argument("unknown token " + to_string(t));
  return holder_[t.owner.value][t.rank];
}

TokenSet TokenConfiguration::held_by(ProcessId p) const {
  TokenSet out;
  for (std::uint32_t owner = 0; owner < size(); ++owner) {
    for (std::uint32_t rank = 0; rank < holder_[owner].size(); ++rank) {
      if (holder_[owner][rank] == p) out.insert(Token{ProcessId(owner), rank});
    }
  }
  return out;
}

std::uint32_t TokenConfiguration::held_count(ProcessId p) const {
  std::uint32_t count = 0;
  for (const auto& row : holder_) count += static_cast<std::uint32_t>(std::count(row.begin(), row.end(), p));
  return count;
}

TokenConfiguration TokenConfiguration::with_version(std::uint64_t version) const {
  TokenConfiguration copy = *this;
  copy.version_ = version;
  return copy;
}

LatencyMatrix::LatencyMatrix(std::vector<std::vector<std::uint64_t>> rtt) : rtt_(std::move(rtt)) {
  const auto n = rtt_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (rtt_[i].size() != n) throw std::invalid_argument("latency matrix is not square");
    if (rtt_[i][i] != 0) throw std::invalid_argument("latency matrix diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (rtt_[i][j] != rtt_[j][i]) {
        throw std::invalid_argument("latency matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

LatencyMatrix LatencyMatrix::uniform(std::uint32_t n, std::uint64_t rtt) {
  std::vector<std::vector<std::uint64_t>> m(n, std::vector<std::uint64_t>(n, rtt));
  for (std::uint32_t i = 0; i < n; ++i) m[i][i] = 0;
  return LatencyMatrix(std::move(m));
}

ProcessSet owners_touched(const TokenConfiguration& config, ProcessSet s) {
  ProcessSet out;
  const auto& holders = config.holders_of_owner();
  for (std::uint32_t owner = 0; owner < holders.size(); ++owner) {
    if (!(holders[owner] & s).empty()) out.insert(ProcessId(owner));
  }
  return out;
}

ProcessSet owners_covered(const TokenConfiguration& config, ProcessSet s) {
  ProcessSet out;
  const auto& holders = config.holders_of_owner();
  for (std::uint32_t owner = 0; owner < holders.size(); ++owner) {
    if (holders[owner].is_subset_of(s)) out.insert(ProcessId(owner));
  }
  return out;
}

bool is_read_quorum(const TokenConfiguration& config, ProcessSet s) {
  check_members(config, s);
  return owners_touched(config, s).size() >= majority(config.size());
}

bool is_write_quorum(const TokenConfiguration& config, ProcessSet s) {
  check_members(config, s);
  const auto needed = majority(config.size());
  return s.size() >= needed && owners_covered(config, s).size() >= needed;
}

TokenConfiguration mimic_leader(std::uint32_t n, ProcessId leader) {
  check_cluster_size(n);
  if (leader.value >= n) throw std::invalid_argument("leader " + to_string(leader) + " outside cluster");
  auto profile = OwnershipProfile::uniform(n, 1);
  std::vector<std::vector<ProcessId>> holder(n, std::vector<ProcessId>{leader});
  return TokenConfiguration(std::move(profile), std::move(holder));
}

TokenConfiguration mimic_majority(std::uint32_t n) {
  check_cluster_size(n);
  auto profile = OwnershipProfile::uniform(n, 1);
  auto holder = identity_holders(profile);
  return TokenConfiguration(std::move(profile), std::move(holder));
}

TokenConfiguration mimic_flexible(std::uint32_t n, const std::vector<std::pair<Token, ProcessId>>& transfers) {
  check_cluster_size(n);
  auto profile = OwnershipProfile::uniform(n, 1);
  auto holder = identity_holders(profile);
  std::set<Token> seen;
  for (const auto& [token, to] : transfers) {
    if (!profile.contains(token)) throw std::invalid_argument("transfer of unknown token " + to_string(token));
    if (to.value >= n) throw std::invalid_argument("transfer of " + to_string(token) + " to unknown process");
    if (!seen.insert(token).second) {
      throw std::invalid_argument("token " + to_string(token) + " is transferred more than once");
    }
    holder[token.owner.value][token.rank] = to;
  }
  return TokenConfiguration(std::move(profile), std::move(holder));
}

TokenConfiguration mimic_local(std::uint32_t n) {
  check_cluster_size(n);
  auto profile = OwnershipProfile::uniform(n, n);
  std::vector<std::vector<ProcessId>> holder(n);
  for (std::uint32_t owner = 0; owner < n; ++owner) {
    for (std::uint32_t rank = 0; rank < n; ++rank) holder[owner].emplace_back(rank);
  }
  return TokenConfiguration(std::move(profile), std::move(holder));
}

ProcessSet closest_read_quorum(const TokenConfiguration& config, ProcessId origin, const LatencyMatrix& latency) {
  const auto n = config.size();
  if (origin.value >= n) throw std::invalid_argument("origin outside cluster");
  if (latency.size() != n) throw std::invalid_argument("latency matrix size does not match cluster");

  ProcessSet required;
  if (config.held_count(origin) > 0) required.insert(origin);

  std::vector<ProcessId> holders;
  std::vector<std::uint64_t> radii;
  for (std::uint32_t i = 0; i < n; ++i) {
    ProcessId p(i);
    if (config.held_count(p) == 0) continue;
    holders.push_back(p);
    radii.push_back(latency.rtt(origin, p));
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  for (auto radius : radii) {
    std::vector<ProcessId> pool;
    ProcessSet pool_set;
    for (auto p : holders) {
      if (latency.rtt(origin, p) <= radius) {
        pool.push_back(p);
        pool_set.insert(p);
      }
    }
    if (!required.is_subset_of(pool_set) || !is_read_quorum(config, pool_set)) continue;
    if (pool.size() <= kExactSearchLimit) {
      if (auto found = smallest_quorum_within(config, pool, required)) return *found;
    }
    return greedy_quorum_within(config, pool, required, origin, latency);
  }
  // Unreachable: all holders together touch every owner.
  throw std::logic_error("no read quorum found");
}

std::vector<ProcessSet> minimal_read_quorums(const TokenConfiguration& config) {
  return minimal_sets(config.size(), [&](ProcessSet s) { return is_read_quorum(config, s); });
}

std::vector<ProcessSet> minimal_write_quorums(const TokenConfiguration& config) {
  return minimal_sets(config.size(), [&](ProcessSet s) { return is_write_quorum(config, s); });
}

bool verify_intersection(const TokenConfiguration& config) {
  const auto reads = minimal_read_quorums(config);
  const auto writes = minimal_write_quorums(config);
  const auto tokens = config.profile().tokens();
  for (auto w : writes) {
    const auto covered = owners_covered(config, w);
    for (auto r : reads) {
      const auto both = r & w;
      const bool shared = std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) {
        return both.contains(config.holder(t)) && covered.contains(t.owner);
      });
      if (!shared) return false;
    }
  }
  return true;
}

}  // namespace chameleon
