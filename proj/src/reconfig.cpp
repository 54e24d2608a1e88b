// Centralized synchronous reconfiguration of the token quorum system.
//
// The leader stalls new writes, waits for outstanding ones to commit, then runs the new
// configuration through the log. A process that receives the configuration's PREPARE no
// longer knows which tokens it holds and parks PREPARE/READ handling until the COMMIT.
// The COMMIT is only sent once every process has acknowledged the PREPARE.

#include <utility>

#include "chameleon/replica.hpp"

namespace chameleon {

Effects Replica::propose_config(const TokenConfiguration& next) {
  Effects out;
  if (!is_leader()) {
    out.notify(ConfigRejected{"only the leader can reconfigure"});
  } else if (next.size() != n_) {
    out.notify(ConfigRejected{"configuration is for " + std::to_string(next.size()) + " processes, cluster has " +
                              std::to_string(n_)});
  } else if (reconfig_) {
    out.notify(ConfigRejected{"a reconfiguration is already in flight"});
  } else {
    reconfig_.emplace(Reconfig{next, std::nullopt, {}});
    out.notify(ConfigTriggered{});
    maybe_issue_config(out);
  }
  return out;
}

void Replica::maybe_issue_config(Effects& out) {
  if (!reconfig_ || reconfig_->index || !pending_writes_.empty()) return;
  const auto index = ++last_index_;
  reconfig_->index = index;
  reconfig_->next = reconfig_->next.with_version(index);
  out.notify(ConfigProposed{index});
  send_all(msg::Prepare{index, ConfigEntry{reconfig_->next}}, out);
}

void Replica::on_config_ack(ProcessId from, const msg::PrepareAck& m, Effects& out) {
  reconfig_->acks.insert(from);
  if (reconfig_->acks.size() < n_) return;

  const auto index = m.index;
  auto next = std::move(reconfig_->next);
  reconfig_.reset();
  out.notify(ConfigFullyAcked{index});
  send_all(msg::Commit{index, ConfigEntry{next}}, out);
  adopt_config(next, out);

  while (!queued_writes_.empty() && !reconfig_) {
    auto [client, write] = std::move(queued_writes_.front());
    queued_writes_.pop_front();
    assign_write(client, write, out);
  }
}

void Replica::on_prepare_config(ProcessId from, const msg::Prepare& m, Effects& out) {
  const auto& entry = std::get<ConfigEntry>(m.payload);
  const bool known = m.index <= config_.version() || m.index <= applied_up_to_ || committed_.contains(m.index);
  if (known || pending_config_index_ == m.index) {
    // Duplicate: answer without touching state, otherwise the leader could wait forever.
    out.send(from, msg::PrepareAck{m.index, config_valid_ ? held_tokens_ : TokenSet{}, config_.version()});
    return;
  }
  if (!config_valid_) {
    stalled_.emplace_back(StalledMessage{from, m});
    return;
  }
  config_valid_ = false;
  pending_config_index_ = m.index;
  max_prepare_ = std::max(max_prepare_, m.index);
  log_.insert_or_assign(m.index, ConfigEntry{entry.config});
  out.send(from, msg::PrepareAck{m.index, {}, config_.version()});
}

void Replica::adopt_config(const TokenConfiguration& next, Effects& out) {
  if (next.version() <= config_.version()) return;
  config_ = next;
  held_tokens_ = config_.held_by(self_);
  quorum_cache_.reset();
  if (pending_config_index_ && *pending_config_index_ <= next.version()) pending_config_index_.reset();
  out.notify(ConfigAdopted{next.version()});
  if (!pending_config_index_) {
    config_valid_ = true;
    replay_stalled(out);
  }
}

void Replica::replay_stalled(Effects& out) {
  auto parked = std::exchange(stalled_, {});
  for (auto& item : parked) {
    if (auto* m = std::get_if<StalledMessage>(&item)) {
      dispatch(m->from, m->message, out);
    } else {
      auto& read = std::get<StalledRead>(item);
      if (config_valid_) {
        start_read(read.counter, std::move(read.op), out);
      } else {
        stalled_.push_back(std::move(item));
      }
    }
  }
}

}  // namespace chameleon
