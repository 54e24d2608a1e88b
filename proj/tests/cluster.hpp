#pragma once

// A synchronous in-memory network for driving replicas by hand: messages sit in a FIFO queue
// until a test delivers them, optionally filtering or reordering first.

#include <deque>
#include <functional>
#include <vector>

#include "chameleon/replica.hpp"

namespace testnet {

using namespace chameleon;

struct InFlight {
  ProcessId from;
  ProcessId to;
  Message message;
};

struct Raised {
  ProcessId at;
  Notice notice;
};

struct Cluster {
  std::vector<Replica> replicas;
  std::deque<InFlight> queue;
  std::vector<Raised> notices;

  Cluster(const TokenConfiguration& config, ProcessId leader, const LatencyMatrix& lat, ReplicaOptions options = {}) {
    for (std::uint32_t p = 0; p < config.size(); ++p) replicas.emplace_back(ProcessId{p}, leader, config, lat, options);
  }
  Cluster(const TokenConfiguration& config, ProcessId leader = ProcessId{0})
      : Cluster(config, leader, LatencyMatrix::uniform(config.size(), 10)) {}

  Replica& at(ProcessId p) { return replicas.at(p.value); }

  void absorb(ProcessId from, Effects e) {
    for (auto& s : e.sends) queue.push_back({from, s.to, std::move(s.message)});
    for (auto& n : e.notices) notices.push_back({from, std::move(n)});
  }

  std::uint64_t write(ProcessId origin, std::string key, std::string value) {
    auto [c, e] = at(origin).client_write(Put{std::move(key), std::move(value)});
    absorb(origin, std::move(e));
    return c;
  }
  std::uint64_t read(ProcessId origin, std::string key) {
    auto [c, e] = at(origin).client_read(Get{std::move(key)});
    absorb(origin, std::move(e));
    return c;
  }

  void deliver(InFlight m) { absorb(m.to, at(m.to).handle(m.from, m.message)); }

  /// Delivers queued messages in FIFO order; `keep` may veto (drop) a message.
  std::size_t run(const std::function<bool(const InFlight&)>& keep = {}) {
    std::size_t delivered = 0;
    while (!queue.empty()) {
      auto m = std::move(queue.front());
      queue.pop_front();
      if (keep && !keep(m)) continue;
      deliver(std::move(m));
      ++delivered;
    }
    return delivered;
  }

  /// Removes and returns every queued message matching `pred`, leaving the rest in order.
  std::vector<InFlight> take(const std::function<bool(const InFlight&)>& pred) {
    std::vector<InFlight> out;
    std::deque<InFlight> rest;
    for (auto& m : queue) (pred(m) ? out.emplace_back(std::move(m)) : rest.emplace_back(std::move(m)));
    queue = std::move(rest);
    return out;
  }

  template <typename N>
  std::vector<N> raised(ProcessId at) const {
    std::vector<N> out;
    for (const auto& r : notices) {
      if (r.at == at) {
        if (const auto* n = std::get_if<N>(&r.notice)) out.push_back(*n);
      }
    }
    return out;
  }
};

template <typename M>
bool is(const InFlight& m) {
  return std::holds_alternative<M>(m.message);
}

}  // namespace testnet
