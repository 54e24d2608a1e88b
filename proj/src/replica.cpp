#include "chameleon/replica.hpp"

#include <algorithm>
#include <stdexcept>

namespace chameleon {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view kind_name(const Message& m) {
  return std::visit(overloaded{
                        [](const msg::Write&) { return std::string_view("WRITE"); },
                        [](const msg::WriteAck&) { return std::string_view("WRITE_ACK"); },
                        [](const msg::Prepare&) { return std::string_view("PREPARE"); },
                        [](const msg::PrepareAck&) { return std::string_view("P_ACK"); },
                        [](const msg::Commit&) { return std::string_view("COMMIT"); },
                        [](const msg::CommitAck&) { return std::string_view("C_ACK"); },
                        [](const msg::Read&) { return std::string_view("READ"); },
                        [](const msg::ReadAck&) { return std::string_view("R_ACK"); },
                    },
                    m);
}

std::uint64_t log_index_of(const Message& m) {
  return std::visit(overloaded{
                        [](const msg::Prepare& p) { return p.index; },
                        [](const msg::PrepareAck& p) { return p.index; },
                        [](const msg::Commit& c) { return c.index; },
                        [](const msg::CommitAck& c) { return c.index; },
                        [](const auto&) { return std::uint64_t{0}; },
                    },
                    m);
}

Replica::Replica(ProcessId self, ProcessId leader, TokenConfiguration initial, LatencyMatrix latency,
                 ReplicaOptions options)
    : self_(self),
      leader_(leader),
      n_(initial.size()),
      latency_(std::move(latency)),
      options_(options),
      config_(std::move(initial)) {
  if (self_.value >= n_ || leader_.value >= n_) throw std::invalid_argument("replica or leader id outside cluster");
  if (latency_.size() != n_) throw std::invalid_argument("latency matrix size does not match cluster");
  held_tokens_ = config_.held_by(self_);
}

std::pair<std::uint64_t, Effects> Replica::client_write(Put op) {
  Effects out;
  const auto counter = ++op_counter_;
  pending_client_writes_.insert(counter);
  out.send(leader_, msg::Write{std::move(op), counter});
  return {counter, std::move(out)};
}

std::pair<std::uint64_t, Effects> Replica::client_read(Get op) {
  Effects out;
  const auto counter = ++op_counter_;
  if (!config_valid_) {
    stalled_.emplace_back(StalledRead{counter, std::move(op)});
  } else {
    start_read(counter, std::move(op), out);
  }
  return {counter, std::move(out)};
}

Effects Replica::handle(ProcessId from, const Message& m) {
  Effects out;
  dispatch(from, m, out);
  return out;
}

void Replica::dispatch(ProcessId from, const Message& m, Effects& out) {
  std::visit(overloaded{
                 [&](const msg::Write& w) { on_write(from, w, out); },
                 [&](const msg::WriteAck& a) { on_write_ack(a, out); },
                 [&](const msg::Prepare& p) { on_prepare(from, p, out); },
                 [&](const msg::PrepareAck& a) { on_prepare_ack(from, a, out); },
                 [&](const msg::Commit& c) { on_commit(from, c, out); },
                 [&](const msg::CommitAck&) {},
                 [&](const msg::Read& r) { on_read(from, r, out); },
                 [&](const msg::ReadAck& a) { on_read_ack(from, a, out); },
             },
             m);
}

void Replica::send_all(const Message& m, Effects& out) const {
  for (std::uint32_t p = 0; p < n_; ++p) out.send(ProcessId(p), m);
}

// ---------------------------------------------------------------------------
// Writes

void Replica::on_write(ProcessId from, const msg::Write& m, Effects& out) {
  if (!is_leader()) return;
  const ClientKey key{from, m.counter};
  if (auto it = write_status_.find(key); it != write_status_.end()) {
    if (it->second.done) out.send(from, msg::WriteAck{m.counter});
    return;
  }
  if (reconfig_) {
    write_status_[key] = WriteStatus{};
    queued_writes_.emplace_back(from, m);
    return;
  }
  assign_write(from, m, out);
}

void Replica::assign_write(ProcessId client, const msg::Write& m, Effects& out) {
  const auto index = ++last_index_;
  AppWrite entry{client, m.counter, m.op};
  pending_writes_.emplace(index, PendingWrite{entry, config_.version(), {}, {}});
  write_status_[{client, m.counter}] = WriteStatus{index, false};
  out.notify(WriteIndexAssigned{client, m.counter, index});
  send_all(msg::Prepare{index, std::move(entry)}, out);
}

void Replica::on_prepare(ProcessId from, const msg::Prepare& m, Effects& out) {
  if (std::holds_alternative<ConfigEntry>(m.payload)) {
    on_prepare_config(from, m, out);
    return;
  }
  if (!config_valid_) {
    stalled_.emplace_back(StalledMessage{from, m});
    return;
  }
  max_prepare_ = std::max(max_prepare_, m.index);
  if (m.index > applied_up_to_) log_.insert_or_assign(m.index, m.payload);
  out.send(from, msg::PrepareAck{m.index, held_tokens_, config_.version()});
}

void Replica::on_prepare_ack(ProcessId from, const msg::PrepareAck& m, Effects& out) {
  if (!is_leader()) return;
  if (reconfig_ && reconfig_->index == m.index) {
    on_config_ack(from, m, out);
    return;
  }
  auto it = pending_writes_.find(m.index);
  if (it == pending_writes_.end()) return;
  auto& pw = it->second;
  if (m.config_version != pw.config_version) {
    ++mismatched_acks_;
    return;
  }
  pw.acks.insert(from);
  pw.returned.insert(m.tokens.begin(), m.tokens.end());

  std::vector<std::uint32_t> per_owner(n_, 0);
  for (const auto& t : pw.returned) ++per_owner[t.owner.value];
  std::uint32_t covered = 0;
  for (std::uint32_t owner = 0; owner < n_; ++owner) {
    if (per_owner[owner] == config_.profile().tokens_owned(ProcessId(owner))) ++covered;
  }

  const auto needed = majority(n_);
  if (pw.acks.size() < needed || covered < needed) return;

  const auto index = it->first;
  const auto write = pw.write;
  const auto acks = pw.acks.size();
  pending_writes_.erase(it);
  write_status_[{write.client, write.counter}].done = true;
  send_all(msg::Commit{index, write}, out);
  out.send(write.client, msg::WriteAck{write.counter});
  out.notify(WriteCommitted{write.client, write.counter, index, acks});
  maybe_issue_config(out);
}

void Replica::on_commit(ProcessId from, const msg::Commit& m, Effects& out) {
  if (from != self_) out.send(from, msg::CommitAck{m.index});
  max_prepare_ = std::max(max_prepare_, m.index);
  if (m.index <= applied_up_to_ || committed_.contains(m.index)) return;
  committed_.emplace(m.index, m.payload);
  log_.insert_or_assign(m.index, m.payload);
  if (const auto* entry = std::get_if<ConfigEntry>(&m.payload)) adopt_config(entry->config, out);
  apply_committed(out);
}

void Replica::on_write_ack(const msg::WriteAck& m, Effects& out) {
  if (pending_client_writes_.erase(m.counter) > 0) out.notify(WriteAcked{m.counter});
}

void Replica::apply_committed(Effects& out) {
  while (!committed_.empty() && committed_.begin()->first == applied_up_to_ + 1) {
    auto node = committed_.extract(committed_.begin());
    if (const auto* w = std::get_if<AppWrite>(&node.mapped())) {
      if (applied_ops_.insert({w->client, w->counter}).second) kv_[w->op.key] = w->op.value;
    }
    applied_up_to_ = node.key();
    applied_log_.push_back(LogEntry{node.key(), std::move(node.mapped())});
    log_.erase(applied_up_to_);
  }
  execute_ready_reads(out);
}

// ---------------------------------------------------------------------------
// Reads

ProcessSet Replica::read_quorum() {
  if (!quorum_cache_ || quorum_cache_->first != config_.version()) {
    quorum_cache_.emplace(config_.version(), closest_read_quorum(config_, self_, latency_));
  }
  return quorum_cache_->second;
}

void Replica::start_read(std::uint64_t counter, Get op, Effects& out) {
  const auto quorum = read_quorum();
  auto& read = pending_reads_[counter];
  read.op = std::move(op);
  if (quorum == ProcessSet{self_}) {
    read.counted.insert(self_);
    read.counted_versions.insert(config_.version());
    read.best_version = config_.version();
    read.best_index = max_prepare_;
    fix_read_index(counter, read, true, out);
    return;
  }
  read.targets = options_.fanout == ReadFanout::broadcast ? ProcessSet::all(n_) : quorum;
  for (auto p : read.targets.members()) out.send(p, msg::Read{counter});
}

void Replica::on_read(ProcessId from, const msg::Read& m, Effects& out) {
  if (!config_valid_) {
    stalled_.emplace_back(StalledMessage{from, m});
    return;
  }
  out.send(from, msg::ReadAck{m.counter, held_tokens_, max_prepare_, config_.version()});
}

void Replica::on_read_ack(ProcessId from, const msg::ReadAck& m, Effects& out) {
  auto it = pending_reads_.find(m.counter);
  if (it == pending_reads_.end() || it->second.fixed_index) return;
  auto& read = it->second;
  read.responded.insert(from);

  // Only acks computed from the newest configuration seen so far count.
  if (m.config_version > read.best_version) {
    read.covered = {};
    read.counted = {};
    read.counted_versions.clear();
    read.best_index = 0;
    read.best_version = m.config_version;
  }
  if (m.config_version == read.best_version) {
    read.counted.insert(from);
    read.counted_versions.insert(m.config_version);
    read.best_index = std::max(read.best_index, m.max_prepare);
    for (const auto& t : m.tokens) read.covered.insert(t.owner);
  }

  if (read.covered.size() >= majority(n_)) {
    fix_read_index(m.counter, read, false, out);
    return;
  }
  if (read.targets.is_subset_of(read.responded)) {
    // Coverage fell short: ask everyone.
    read.targets = ProcessSet::all(n_);
    read.responded = {};
    ++read.rounds;
    for (auto p : read.targets.members()) out.send(p, msg::Read{m.counter});
  }
}

void Replica::fix_read_index(std::uint64_t counter, PendingRead& read, bool local, Effects& out) {
  read.fixed_index = read.best_index;
  out.notify(ReadIndexFixed{counter, read.best_index, read.best_version,
                            {read.counted_versions.begin(), read.counted_versions.end()}, local, read.rounds});
  reads_awaiting_apply_.emplace(read.best_index, counter);
  execute_ready_reads(out);
}

void Replica::execute_ready_reads(Effects& out) {
  while (!reads_awaiting_apply_.empty() && reads_awaiting_apply_.begin()->first <= applied_up_to_) {
    const auto [index, counter] = *reads_awaiting_apply_.begin();
    reads_awaiting_apply_.erase(reads_awaiting_apply_.begin());
    auto it = pending_reads_.find(counter);
    std::optional<std::string> value;
    if (auto kv = kv_.find(it->second.op.key); kv != kv_.end()) value = kv->second;
    out.notify(ReadCompleted{counter, index, std::move(value)});
    pending_reads_.erase(it);
  }
}

}  // namespace chameleon
