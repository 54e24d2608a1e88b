#include "chameleon/report.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "json.hpp"

namespace chameleon::report {

using ordered_json = nlohmann::ordered_json;

LatencyStats latency_stats(std::vector<std::uint64_t> samples) {
  LatencyStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const auto total = std::accumulate(samples.begin(), samples.end(), 0.0);
  s.mean = total / static_cast<double>(samples.size());
  const auto mid = samples.size() / 2;
  s.median = samples.size() % 2 ? static_cast<double>(samples[mid])
                                : (static_cast<double>(samples[mid - 1]) + static_cast<double>(samples[mid])) / 2.0;
  const auto rank = (99 * samples.size() + 99) / 100;
  s.p99 = samples[rank - 1];
  return s;
}

namespace {

ordered_json to_json(const LatencyStats& s) {
  ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["p99"] = s.p99;
  return j;
}

std::string opt_num(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : "-1"; }

ordered_json to_json(const HistoryEvent& e) {
  ordered_json j;
  j["op_id"] = e.op_id;
  j["describe"] = describe(e);
  return j;
}

}  // namespace

std::vector<Epoch> epochs(const sim::Scenario& scenario, const sim::RunResult& result) {
  struct Boundary {
    Stamp at;
    std::string config;
  };
  std::vector<Boundary> bounds{{Stamp{}, scenario.initial.describe()}};
  for (const auto& r : result.reconfigs) {
    if (r.fully_acked) bounds.push_back({*r.fully_acked, r.spec});
  }
  std::stable_sort(bounds.begin() + 1, bounds.end(), [](const auto& a, const auto& b) { return a.at < b.at; });

  std::vector<std::vector<std::uint64_t>> reads(bounds.size()), writes(bounds.size());
  for (const auto& op : result.ops) {
    const auto lat = op.latency();
    if (!lat) continue;
    std::size_t e = 0;
    while (e + 1 < bounds.size() && bounds[e + 1].at <= op.invoke) ++e;
    (op.kind == OpKind::get ? reads : writes)[e].push_back(*lat);
  }
  std::vector<Epoch> out;
  for (std::size_t e = 0; e < bounds.size(); ++e) {
    out.push_back(Epoch{bounds[e].config, bounds[e].at.time, latency_stats(std::move(reads[e])),
                        latency_stats(std::move(writes[e]))});
  }
  return out;
}

bool Verdicts::ok() const {
  if (!complete || !invariant_violations.empty()) return false;
  if (!lin_error.empty() || !oracle_error.empty()) return false;
  if (linearizability && !linearizability->ok) return false;
  if (oracle && !oracle->ok) return false;
  return true;
}

Verdicts evaluate(const sim::Scenario& scenario, const sim::RunResult& result) {
  Verdicts v;
  v.complete = result.complete;
  v.incomplete_reason = result.incomplete_reason;
  v.invariant_violations = result.invariant_violations;
  if (scenario.checks.linearizability) {
    try {
      v.linearizability = check_linearizable(result.history, LinOptions{scenario.checks.lin_bound});
    } catch (const HistoryTooLarge& e) {
      v.lin_error = e.what();
    }
  }
  if (scenario.checks.oracle) {
    try {
      v.oracle = check_read_index_oracle(result.history);
    } catch (const std::invalid_argument& e) {
      v.oracle_error = e.what();
    }
  }
  return v;
}

void write_ops_csv(std::ostream& out, const sim::RunResult& result) {
  out << "op_id,kind,origin,invoke_time,response_time,latency,assigned_index,messages_sent\n";
  for (const auto& op : result.ops) {
    out << op.op_id << ',' << to_string(op.kind) << ',' << to_string(op.origin) << ',' << op.invoke.time << ','
        << (op.response ? std::to_string(op.response->time) : "-1") << ',' << opt_num(op.latency()) << ','
        << opt_num(op.assigned_index) << ',' << op.messages_sent << '\n';
  }
}

void write_trace_csv(std::ostream& out, const sim::RunResult& result) {
  out << "seq,time,event,source,target,kind,index\n";
  for (const auto& t : result.trace) {
    out << t.seq << ',' << t.time << ',' << t.event << ',' << to_string(t.source) << ',' << to_string(t.target) << ','
        << t.kind << ',' << t.index << '\n';
  }
}

void write_summary(std::ostream& out, const sim::Scenario& scenario, const sim::RunResult& result) {
  std::vector<std::uint64_t> reads, writes;
  std::uint64_t read_msgs = 0, write_msgs = 0;
  for (const auto& op : result.ops) {
    (op.kind == OpKind::get ? read_msgs : write_msgs) += op.messages_sent;
    if (const auto lat = op.latency()) (op.kind == OpKind::get ? reads : writes).push_back(*lat);
  }

  ordered_json j;
  j["scenario"] = scenario.name;
  j["seed"] = scenario.faults.rng_seed;
  j["complete"] = result.complete;
  j["end_time"] = result.end_time;
  j["read_latency"] = to_json(latency_stats(std::move(reads)));
  j["write_latency"] = to_json(latency_stats(std::move(writes)));

  ordered_json by_op;
  by_op["get"] = read_msgs;
  by_op["put"] = write_msgs;
  by_op["config"] = result.config_messages;
  j["messages_by_op_kind"] = by_op;
  ordered_json by_msg = ordered_json::object();
  for (const auto& [kind, count] : result.messages_by_kind) by_msg[kind] = count;
  j["messages_by_message_kind"] = by_msg;
  ordered_json targets = ordered_json::array();
  for (auto c : result.read_targets) targets.push_back(c);
  j["read_targets"] = targets;

  ordered_json eps = ordered_json::array();
  for (const auto& e : epochs(scenario, result)) {
    ordered_json ej;
    ej["config"] = e.config;
    ej["start_time"] = e.start_time;
    ej["read_latency"] = to_json(e.reads);
    ej["write_latency"] = to_json(e.writes);
    eps.push_back(ej);
  }
  j["epochs"] = eps;

  ordered_json recs = ordered_json::array();
  for (const auto& r : result.reconfigs) {
    ordered_json rj;
    rj["scheduled_time"] = r.scheduled_time;
    rj["config"] = r.spec;
    rj["triggered_time"] = r.triggered.time;
    rj["proposed_time"] = r.proposed ? ordered_json(r.proposed->time) : ordered_json(nullptr);
    rj["index"] = r.index ? ordered_json(*r.index) : ordered_json(nullptr);
    rj["fully_acked_time"] = r.fully_acked ? ordered_json(r.fully_acked->time) : ordered_json(nullptr);
    rj["rejected"] = r.rejected ? ordered_json(*r.rejected) : ordered_json(nullptr);
    recs.push_back(rj);
  }
  j["reconfigurations"] = recs;
  out << j.dump(2) << '\n';
}

void write_verdicts(std::ostream& out, const Verdicts& v) {
  ordered_json j;
  j["ok"] = v.ok();
  j["complete"] = v.complete;
  if (!v.complete) j["incomplete_reason"] = v.incomplete_reason;

  ordered_json lin;
  if (!v.lin_error.empty()) {
    lin["status"] = "error";
    lin["message"] = v.lin_error;
  } else if (!v.linearizability) {
    lin["status"] = "skipped";
  } else {
    lin["status"] = v.linearizability->ok ? "ok" : "violation";
    if (!v.linearizability->ok) {
      lin["key"] = v.linearizability->key;
      lin["message"] = v.linearizability->message;
      ordered_json ce = ordered_json::array();
      for (const auto& e : v.linearizability->counterexample) ce.push_back(to_json(e));
      lin["counterexample"] = ce;
    }
  }
  j["linearizability"] = lin;

  ordered_json oracle;
  if (!v.oracle_error.empty()) {
    oracle["status"] = "error";
    oracle["message"] = v.oracle_error;
  } else if (!v.oracle) {
    oracle["status"] = "skipped";
  } else {
    oracle["status"] = v.oracle->ok ? "ok" : "violation";
    oracle["reads_checked"] = v.oracle->reads_checked;
    if (!v.oracle->ok) {
      oracle["message"] = v.oracle->message;
      if (v.oracle->write) oracle["write"] = to_json(*v.oracle->write);
      if (v.oracle->read) oracle["read"] = to_json(*v.oracle->read);
    }
  }
  j["read_index_oracle"] = oracle;
  j["invariant_violations"] = v.invariant_violations;
  out << j.dump(2) << '\n';
}

}  // namespace chameleon::report
