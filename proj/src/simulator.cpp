#include "chameleon/simulator.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>
#include <type_traits>
#include <unordered_map>
#include <variant>

namespace chameleon::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// splitmix64 finalizer: a keyed, stateless draw.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename T, typename V>
struct alternative_index;
template <typename T, typename... Ts>
struct alternative_index<T, std::variant<Ts...>> {
  static constexpr std::size_t value = [] {
    std::size_t i = 0;
    (void)((std::is_same_v<T, Ts> ? false : (++i, true)) && ...);
    return i;
  }();
};
template <typename T>
constexpr std::size_t kind_of = alternative_index<T, Message>::value;

enum class Draw : std::uint64_t { drop = 0, jitter = 1, duplicate = 2, duplicate_jitter = 3 };

struct RetransmitKey {
  std::uint32_t from;
  std::uint32_t to;
  std::size_t kind;
  std::uint64_t id;
  auto operator<=>(const RetransmitKey&) const = default;
};

struct Deliver {
  ProcessId from;
  ProcessId to;
  Message message;
};
struct Invoke {
  std::size_t op;
};
struct Trigger {
  std::size_t entry;
};
struct Timer {
  RetransmitKey key;
  Deliver payload;
};

struct Event {
  std::uint64_t time;
  std::uint64_t seq;
  std::variant<Deliver, Invoke, Trigger, Timer> body;
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const { return std::tie(a.time, a.seq) > std::tie(b.time, b.seq); }
};

// Request messages that are retransmitted until the matching response arrives.
std::optional<RetransmitKey> request_key(ProcessId from, ProcessId to, const Message& m) {
  return std::visit(overloaded{
                        [&](const msg::Write& w) -> std::optional<RetransmitKey> {
                          return RetransmitKey{from.value, to.value, m.index(), w.counter};
                        },
                        [&](const msg::Prepare& p) -> std::optional<RetransmitKey> {
                          return RetransmitKey{from.value, to.value, m.index(), p.index};
                        },
                        [&](const msg::Commit& c) -> std::optional<RetransmitKey> {
                          return RetransmitKey{from.value, to.value, m.index(), c.index};
                        },
                        [&](const msg::Read& r) -> std::optional<RetransmitKey> {
                          return RetransmitKey{from.value, to.value, m.index(), r.counter};
                        },
                        [](const auto&) -> std::optional<RetransmitKey> { return std::nullopt; },
                    },
                    m);
}

// The request a response acknowledges, keyed from the requester's side.
std::optional<RetransmitKey> acked_key(ProcessId from, ProcessId to, const Message& m) {
  constexpr auto kWrite = kind_of<msg::Write>;
  constexpr auto kPrepare = kind_of<msg::Prepare>;
  constexpr auto kCommit = kind_of<msg::Commit>;
  constexpr auto kRead = kind_of<msg::Read>;
  return std::visit(overloaded{
                        [&](const msg::WriteAck& a) -> std::optional<RetransmitKey> {
                          return RetransmitKey{to.value, from.value, kWrite, a.counter};
                        },
                        [&](const msg::PrepareAck& a) -> std::optional<RetransmitKey> {
                          return RetransmitKey{to.value, from.value, kPrepare, a.index};
                        },
                        [&](const msg::CommitAck& a) -> std::optional<RetransmitKey> {
                          return RetransmitKey{to.value, from.value, kCommit, a.index};
                        },
                        [&](const msg::ReadAck& a) -> std::optional<RetransmitKey> {
                          return RetransmitKey{to.value, from.value, kRead, a.counter};
                        },
                        [](const auto&) -> std::optional<RetransmitKey> { return std::nullopt; },
                    },
                    m);
}

class Simulation {
 public:
  explicit Simulation(const Scenario& scenario)
      : sc_(scenario), plan_(generate_workload(scenario.workload, scenario.n, scenario.faults.rng_seed)) {
    const auto initial = sc_.initial.build();
    for (std::uint32_t p = 0; p < sc_.n; ++p) {
      replicas_.emplace_back(ProcessId(p), sc_.leader, initial, sc_.latency, ReplicaOptions{sc_.fanout});
    }
    watermarks_.assign(sc_.n, {0, 0});
    result_.read_targets.assign(sc_.n, 0);

    timeout_ = sc_.faults.retransmit_timeout;
    if (timeout_ == 0) {
      std::uint64_t max_rtt = 0;
      for (std::uint32_t a = 0; a < sc_.n; ++a) {
        for (std::uint32_t b = 0; b < sc_.n; ++b) max_rtt = std::max(max_rtt, sc_.latency.rtt(ProcessId(a), ProcessId(b)));
      }
      timeout_ = max_rtt + 2 * sc_.faults.reorder_jitter + 1;
    }

    result_.ops.resize(plan_.size());
    for (std::size_t i = 0; i < plan_.size(); ++i) {
      auto& op = result_.ops[i];
      op.op_id = plan_[i].op_id;
      op.kind = plan_[i].kind;
      op.key = plan_[i].key;
      op.origin = plan_[i].origin;
      if (op.kind == OpKind::put) op.value = plan_[i].value;
      push(plan_[i].time, Invoke{i});
    }
    for (std::size_t i = 0; i < sc_.schedule.size(); ++i) push(sc_.schedule[i].time, Trigger{i});
  }

  RunResult run() {
    while (!done()) {
      if (queue_.empty()) {
        result_.incomplete_reason = "event queue drained with operations outstanding";
        break;
      }
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time > sc_.time_budget) {
        result_.incomplete_reason = "virtual-time budget exhausted";
        break;
      }
      if (ev.time < now_) throw std::logic_error("simulated clock went backwards");
      now_ = ev.time;
      current_seq_ = ev.seq;
      std::visit([&](auto& body) { step(body); }, ev.body);
    }
    result_.complete = done();
    result_.end_time = now_;
    finish();
    return std::move(result_);
  }

 private:
  bool done() const {
    return completed_ops_ == plan_.size() && triggers_fired_ == sc_.schedule.size() && !active_reconfig_;
  }

  void push(std::uint64_t time, decltype(Event::body) body) { queue_.push(Event{time, next_event_seq_++, std::move(body)}); }

  Stamp stamp() { return Stamp{now_, next_stamp_seq_++}; }

  void trace(std::string_view event, ProcessId source, ProcessId target, std::string_view kind, std::uint64_t index) {
    result_.trace.push_back(TraceRecord{current_seq_, now_, event, source, target, kind, index});
  }

  double uniform(std::uint64_t send_seq, Draw purpose) const {
    const auto x = mix(sc_.faults.rng_seed ^ mix(send_seq * 4 + static_cast<std::uint64_t>(purpose)));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }
  std::uint64_t jitter(std::uint64_t send_seq, Draw purpose) const {
    if (sc_.faults.reorder_jitter == 0) return 0;
    const auto x = mix(sc_.faults.rng_seed ^ mix(send_seq * 4 + static_cast<std::uint64_t>(purpose)));
    return x % (sc_.faults.reorder_jitter + 1);
  }

  // ---- events

  void step(Deliver& d) {
    trace("deliver", d.from, d.to, kind_name(d.message), log_index_of(d.message));
    if (d.from != d.to) {
      if (auto key = acked_key(d.from, d.to, d.message)) active_.erase(*key);
    }
    auto effects = replicas_[d.to.value].handle(d.from, d.message);
    process(d.to, effects);
  }

  void step(Invoke& inv) {
    const auto& planned = plan_[inv.op];
    auto& op = result_.ops[inv.op];
    auto& replica = replicas_[planned.origin.value];
    trace("invoke", planned.origin, planned.origin, to_string(planned.kind), 0);
    op.invoke = stamp();
    auto [counter, effects] = planned.kind == OpKind::put ? replica.client_write(Put{planned.key, planned.value})
                                                          : replica.client_read(Get{planned.key});
    op.counter = counter;
    by_client_[{planned.origin.value, counter}] = inv.op;
    process(planned.origin, effects);
  }

  void step(Trigger& t) {
    const auto& entry = sc_.schedule[t.entry];
    ++triggers_fired_;
    ReconfigRecord record;
    record.scheduled_time = entry.time;
    record.spec = entry.spec.describe();
    record.triggered = stamp();
    result_.reconfigs.push_back(record);
    triggering_ = result_.reconfigs.size() - 1;
    trace("reconfig", sc_.leader, sc_.leader, "TRIGGER", 0);
    auto effects = replicas_[sc_.leader.value].propose_config(entry.spec.build());
    process(sc_.leader, effects);
  }

  void step(Timer& t) {
    if (!active_.contains(t.key)) return;
    trace("retransmit", t.payload.from, t.payload.to, kind_name(t.payload.message), log_index_of(t.payload.message));
    transmit(t.payload.from, t.payload.to, t.payload.message);
    const auto next = now_ + period(t.payload.message);
    push(next, std::move(t));
  }

  // A WRITE_ACK needs two round trips (client to leader, leader to a write quorum).
  std::uint64_t period(const Message& m) const {
    return std::holds_alternative<msg::Write>(m) ? 2 * timeout_ : timeout_;
  }

  // ---- effects

  void process(ProcessId at, Effects& effects) {
    for (auto& notice : effects.notices) observe(at, notice);
    for (auto& out : effects.sends) route(at, out.to, std::move(out.message));
    check_watermarks(at);
  }

  void route(ProcessId from, ProcessId to, Message m) {
    if (from == to) {
      push(now_, Deliver{from, to, std::move(m)});
      return;
    }
    if (sc_.faults.retransmit) {
      if (auto key = request_key(from, to, m); key && active_.insert(*key).second) {
        push(now_ + period(m), Timer{*key, Deliver{from, to, m}});
      }
    }
    transmit(from, to, std::move(m));
  }

  void transmit(ProcessId from, ProcessId to, const Message& m) {
    const auto kind = kind_name(m);
    ++result_.messages_by_kind[std::string(kind)];
    if (std::holds_alternative<msg::Read>(m)) ++result_.read_targets[to.value];
    attribute(from, to, m);

    const auto seq = next_send_seq_++;
    if (uniform(seq, Draw::drop) < sc_.faults.drop_rate) {
      trace("drop", from, to, kind, log_index_of(m));
      return;
    }
    const auto base = now_ + sc_.latency.one_way(from, to);
    push(base + jitter(seq, Draw::jitter), Deliver{from, to, m});
    if (uniform(seq, Draw::duplicate) < sc_.faults.duplicate_rate) {
      push(base + jitter(seq, Draw::duplicate_jitter), Deliver{from, to, m});
    }
  }

  void attribute(ProcessId from, ProcessId to, const Message& m) {
    auto by_counter = [&](ProcessId client, std::uint64_t counter) -> OpMetrics* {
      auto it = by_client_.find({client.value, counter});
      return it == by_client_.end() ? nullptr : &result_.ops[it->second];
    };
    auto by_index = [&](std::uint64_t index) -> OpMetrics* {
      if (config_indices_.contains(index)) {
        ++result_.config_messages;
        return nullptr;
      }
      auto it = by_index_.find(index);
      return it == by_index_.end() ? nullptr : &result_.ops[it->second];
    };
    OpMetrics* op = std::visit(overloaded{
                                   [&](const msg::Write& w) { return by_counter(from, w.counter); },
                                   [&](const msg::WriteAck& a) { return by_counter(to, a.counter); },
                                   [&](const msg::Read& r) { return by_counter(from, r.counter); },
                                   [&](const msg::ReadAck& a) { return by_counter(to, a.counter); },
                                   [&](const auto& indexed) { return by_index(indexed.index); },
                               },
                               m);
    if (op) ++op->messages_sent;
  }

  void observe(ProcessId at, const Notice& notice) {
    auto op_for = [&](ProcessId client, std::uint64_t counter) -> OpMetrics& {
      return result_.ops.at(by_client_.at({client.value, counter}));
    };
    std::visit(overloaded{
                   [&](const WriteIndexAssigned& n) {
                     auto& op = op_for(n.client, n.counter);
                     op.assigned_index = n.index;
                     op.index_stamp = stamp();
                     by_index_[n.index] = by_client_.at({n.client.value, n.counter});
                   },
                   [&](const WriteCommitted& n) {
                     auto& op = op_for(n.client, n.counter);
                     op.response = stamp();
                     op.acks_at_commit = n.acks;
                     ++completed_ops_;
                   },
                   [&](const WriteAcked& n) { op_for(at, n.counter).client_ack = stamp(); },
                   [&](const ReadIndexFixed& n) {
                     auto& op = op_for(at, n.counter);
                     op.assigned_index = n.index;
                     op.index_stamp = stamp();
                     op.counted_versions = n.counted_versions;
                     op.read_config_version = n.config_version;
                     op.local_read = n.local;
                     op.read_rounds = n.rounds;
                   },
                   [&](const ReadCompleted& n) {
                     auto& op = op_for(at, n.counter);
                     op.response = stamp();
                     op.value = n.value;
                     ++completed_ops_;
                   },
                   [&](const ConfigTriggered&) { active_reconfig_ = triggering_; },
                   [&](const ConfigRejected& n) { result_.reconfigs.at(*triggering_).rejected = n.reason; },
                   [&](const ConfigProposed& n) {
                     auto& r = result_.reconfigs.at(*active_reconfig_);
                     r.proposed = stamp();
                     r.index = n.index;
                     config_indices_.insert(n.index);
                   },
                   [&](const ConfigFullyAcked&) {
                     result_.reconfigs.at(*active_reconfig_).fully_acked = stamp();
                     active_reconfig_.reset();
                   },
                   [&](const ConfigAdopted& n) { trace("adopt", at, at, "CONFIG", n.version); },
               },
               notice);
  }

  void check_watermarks(ProcessId at) {
    const auto& r = replicas_[at.value];
    auto& [prepare, applied] = watermarks_[at.value];
    if (r.max_prepare() < prepare || r.applied_up_to() < applied) {
      result_.invariant_violations.push_back("watermark moved backwards at " + to_string(at));
    }
    if (r.applied_up_to() > r.max_prepare()) {
      result_.invariant_violations.push_back("applied beyond max_prepare at " + to_string(at));
    }
    prepare = r.max_prepare();
    applied = r.applied_up_to();
  }

  void finish() {
    for (const auto& op : result_.ops) {
      HistoryEvent e;
      e.op_id = op.op_id;
      e.kind = op.kind;
      e.key = op.key;
      e.value = op.value;
      e.origin = op.origin;
      e.invoke = op.invoke;
      e.response = op.response;
      e.assigned_index = op.assigned_index;
      if (op.kind == OpKind::get && !op.response) e.value.reset();
      if (op.counter == 0 && op.invoke == Stamp{}) continue;  // never invoked
      result_.history.push_back(std::move(e));
    }
    check_agreement();
    result_.mismatched_acks = replicas_[sc_.leader.value].mismatched_acks();
  }

  void check_agreement() {
    using Identity = std::tuple<std::uint64_t, std::uint32_t, std::uint64_t, std::uint64_t>;
    auto identity = [](const LogEntry& e) -> Identity {
      if (const auto* w = std::get_if<AppWrite>(&e.payload)) return {e.index, w->client.value, w->counter, 0};
      return {e.index, 0, 0, std::get<ConfigEntry>(e.payload).config.version()};
    };
    const auto& reference = replicas_[sc_.leader.value].applied_log();
    for (const auto& r : replicas_) {
      const auto& log = r.applied_log();
      const auto common = std::min(log.size(), reference.size());
      for (std::size_t i = 0; i < common; ++i) {
        if (identity(log[i]) != identity(reference[i])) {
          result_.invariant_violations.push_back("applied logs of " + to_string(r.id()) + " and leader diverge at index " +
                                                 std::to_string(log[i].index));
          break;
        }
      }
    }
  }

  const Scenario& sc_;
  std::vector<PlannedOp> plan_;
  std::vector<Replica> replicas_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t now_{0};
  std::uint64_t current_seq_{0};
  std::uint64_t next_event_seq_{0};
  std::uint64_t next_stamp_seq_{0};
  std::uint64_t next_send_seq_{0};
  std::uint64_t timeout_{0};
  std::set<RetransmitKey> active_;
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::size_t> by_client_;
  std::unordered_map<std::uint64_t, std::size_t> by_index_;
  std::set<std::uint64_t> config_indices_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> watermarks_;
  std::size_t completed_ops_{0};
  std::size_t triggers_fired_{0};
  std::optional<std::size_t> active_reconfig_;
  std::optional<std::size_t> triggering_;
  RunResult result_;
};

}  // namespace

std::vector<PlannedOp> generate_workload(const Workload& workload, std::uint32_t n, std::uint64_t seed) {
  std::vector<PlannedOp> plan;
  if (!workload.script.empty()) {
    for (std::size_t i = 0; i < workload.script.size(); ++i) {
      const auto& s = workload.script[i];
      plan.push_back(PlannedOp{i + 1, s.time, s.origin, s.kind, s.key, s.value});
      if (s.kind == OpKind::put && s.value.empty()) plan.back().value = "v" + std::to_string(i + 1);
    }
    return plan;
  }
  std::mt19937_64 rng(mix(seed ^ 0x776f726b6c6f6164ULL));
  std::vector<double> weights = workload.placement;
  if (weights.empty()) weights.assign(n, 1.0);
  std::discrete_distribution<std::uint32_t> origin(weights.begin(), weights.end());
  std::uniform_int_distribution<std::uint64_t> gap(workload.interarrival_min, workload.interarrival_max);
  std::bernoulli_distribution is_read(workload.read_ratio);
  std::uniform_int_distribution<std::uint32_t> key(0, workload.key_space - 1);

  std::uint64_t t = workload.start_time;
  for (std::uint64_t i = 1; i <= workload.total_ops; ++i) {
    t += gap(rng);
    PlannedOp op;
    op.op_id = i;
    op.time = t;
    op.origin = ProcessId(origin(rng));
    op.kind = is_read(rng) ? OpKind::get : OpKind::put;
    op.key = "k" + std::to_string(key(rng));
    if (op.kind == OpKind::put) op.value = "v" + std::to_string(i);
    plan.push_back(std::move(op));
  }
  return plan;
}

void Scenario::validate() const {
  if (n == 0 || n > kMaxProcesses) throw std::invalid_argument("cluster size must be in [1, 64]");
  if (leader.value >= n) throw std::invalid_argument("leader " + to_string(leader) + " is outside the cluster");
  if (latency.size() != n) throw std::invalid_argument("latency matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (initial.n != n) throw std::invalid_argument("initial configuration size differs from cluster size");
  (void)initial.build();
  for (const auto& entry : schedule) {
    if (entry.spec.n != n) throw std::invalid_argument("scheduled configuration size differs from cluster size");
    (void)entry.spec.build();
  }
  auto rate = [](double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  };
  rate(faults.drop_rate, "drop_rate");
  rate(faults.duplicate_rate, "duplicate_rate");
  rate(workload.read_ratio, "read_ratio");
  if (workload.key_space == 0) throw std::invalid_argument("key_space must be positive");
  if (workload.interarrival_min > workload.interarrival_max) {
    throw std::invalid_argument("interarrival_min exceeds interarrival_max");
  }
  if (!workload.placement.empty()) {
    if (workload.placement.size() != n) throw std::invalid_argument("placement must give a share for every process");
    double total = 0;
    for (double w : workload.placement) {
      if (w < 0) throw std::invalid_argument("placement shares must be non-negative");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("placement shares sum to zero");
  }
  for (const auto& s : workload.script) {
    if (s.origin.value >= n) throw std::invalid_argument("scripted op at unknown process " + to_string(s.origin));
  }
}

RunResult run(const Scenario& scenario) {
  scenario.validate();
  return Simulation(scenario).run();
}

}  // namespace chameleon::sim
