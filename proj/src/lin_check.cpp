#include "chameleon/lin_check.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_set>
#include <vector>

namespace chameleon {

namespace {

constexpr Stamp kNever{std::numeric_limits<std::uint64_t>::max(), std::numeric_limits<std::uint64_t>::max()};

// Wing & Gong style search with memoization on (linearized set, register value).
class RegisterSearch {
 public:
  explicit RegisterSearch(const std::vector<const HistoryEvent*>& events) {
    std::map<std::string, int> ids;
    auto value_id = [&](const std::optional<std::string>& v) {
      if (!v) return -1;
      return ids.try_emplace(*v, static_cast<int>(ids.size())).first->second;
    };
    for (const auto* e : events) {
      if (e->kind == OpKind::get && !e->complete()) continue;
      ops_.push_back(Op{e->invoke, e->response.value_or(kNever), e->kind == OpKind::put, value_id(e->value),
                        e->complete()});
    }
    std::sort(ops_.begin(), ops_.end(), [](const Op& a, const Op& b) { return a.invoke < b.invoke; });
    required_ = static_cast<std::size_t>(std::count_if(ops_.begin(), ops_.end(), [](const Op& o) { return o.required; }));
    words_ = (ops_.size() + 63) / 64;
  }

  bool linearizable() {
    std::vector<std::uint64_t> done(words_, 0);
    return search(done, -1, required_);
  }

 private:
  struct Op {
    Stamp invoke;
    Stamp response;
    bool put;
    int value;
    bool required;
  };

  struct State {
    std::vector<std::uint64_t> done;
    int value;
    bool operator==(const State&) const = default;
  };
  struct StateHash {
    std::size_t operator()(const State& s) const noexcept {
      std::size_t h = std::hash<int>{}(s.value);
      for (auto w : s.done) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  static bool test(const std::vector<std::uint64_t>& bits, std::size_t i) { return (bits[i / 64] >> (i % 64)) & 1U; }
  static void flip(std::vector<std::uint64_t>& bits, std::size_t i) { bits[i / 64] ^= std::uint64_t{1} << (i % 64); }

  bool search(std::vector<std::uint64_t>& done, int value, std::size_t remaining) {
    if (remaining == 0) return true;
    if (!seen_.insert(State{done, value}).second) return false;

    Stamp horizon = kNever;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (!test(done, i)) horizon = std::min(horizon, ops_[i].response);
    }
    // An op may go next only if no pending op finished before it started.
    for (std::size_t i = 0; i < ops_.size() && ops_[i].invoke < horizon; ++i) {
      if (test(done, i)) continue;
      const auto& op = ops_[i];
      if (!op.put && op.value != value) continue;
      flip(done, i);
      const bool found = search(done, op.put ? op.value : value, remaining - (op.required ? 1 : 0));
      flip(done, i);
      if (found) return true;
    }
    return false;
  }

  std::vector<Op> ops_;
  std::size_t required_{0};
  std::size_t words_{0};
  std::unordered_set<State, StateHash> seen_;
};

bool key_linearizable(const std::vector<const HistoryEvent*>& events) { return RegisterSearch(events).linearizable(); }

}  // namespace

LinVerdict check_linearizable(const History& history, const LinOptions& options) {
  std::map<std::string, std::vector<const HistoryEvent*>> by_key;
  for (const auto& e : history) by_key[e.key].push_back(&e);

  for (const auto& [key, events] : by_key) {
    if (events.size() > options.max_ops_per_key) {
      throw HistoryTooLarge("key '" + key + "' has " + std::to_string(events.size()) +
                            " operations, above the exact-check bound of " + std::to_string(options.max_ops_per_key) +
                            "; split the history by key or raise the bound");
    }
    if (key_linearizable(events)) continue;

    // Shrink to a 1-minimal failing sub-history.
    auto failing = events;
    for (std::size_t i = 0; i < failing.size();) {
      auto without = failing;
      without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
      if (!key_linearizable(without)) {
        failing = std::move(without);
      } else {
        ++i;
      }
    }
    LinVerdict verdict;
    verdict.ok = false;
    verdict.key = key;
    for (const auto* e : failing) verdict.counterexample.push_back(*e);
    verdict.message = "key '" + key + "' is not linearizable; minimal witness has " +
                      std::to_string(failing.size()) + " operations";
    return verdict;
  }
  return LinVerdict{true, {}, {}, "linearizable (" + std::to_string(by_key.size()) + " keys)"};
}

OracleVerdict check_read_index_oracle(const History& history) {
  std::vector<const HistoryEvent*> writes;
  std::vector<const HistoryEvent*> reads;
  for (const auto& e : history) {
    if (!e.complete()) continue;
    if (!e.assigned_index) {
      throw std::invalid_argument("operation #" + std::to_string(e.op_id) + " completed without an assigned index");
    }
    (e.kind == OpKind::put ? writes : reads).push_back(&e);
  }
  std::sort(writes.begin(), writes.end(),
            [](const HistoryEvent* a, const HistoryEvent* b) { return *a->response < *b->response; });
  // best[i]: write with the largest index among the first i+1 completed writes.
  std::vector<const HistoryEvent*> best(writes.size());
  for (std::size_t i = 0; i < writes.size(); ++i) {
    best[i] = (i == 0 || *writes[i]->assigned_index > *best[i - 1]->assigned_index) ? writes[i] : best[i - 1];
  }
  std::sort(reads.begin(), reads.end(), [](const HistoryEvent* a, const HistoryEvent* b) { return a->op_id < b->op_id; });

  OracleVerdict verdict;
  for (const auto* r : reads) {
    ++verdict.reads_checked;
    auto it = std::lower_bound(writes.begin(), writes.end(), r->invoke,
                               [](const HistoryEvent* w, const Stamp& s) { return *w->response < s; });
    if (it == writes.begin()) continue;
    const auto* w = best[static_cast<std::size_t>(it - writes.begin()) - 1];
    if (*r->assigned_index < *w->assigned_index) {
      verdict.ok = false;
      verdict.write = *w;
      verdict.read = *r;
      verdict.message = "read " + describe(*r) + " was assigned an index below completed write " + describe(*w);
      return verdict;
    }
  }
  verdict.message = "read-index oracle holds for " + std::to_string(verdict.reads_checked) + " reads";
  return verdict;
}

}  // namespace chameleon
