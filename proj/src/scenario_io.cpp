#include "chameleon/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace chameleon::sim {

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) { throw ScenarioError(line_of(node), what); }

void expect_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, "'" + section + "' must be a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "bad value for " + what);
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, T& target) {
  if (const auto node = parent[key]) target = scalar<T>(node, key);
}

ProcessId process(const YAML::Node& node) {
  try {
    return parse_process(scalar<std::string>(node, "process"));
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
}

double unit_rate(const YAML::Node& node, const char* what) {
  const auto v = scalar<double>(node, what);
  if (!(v >= 0.0 && v <= 1.0)) fail(node, std::string(what) + " must be in [0, 1]");
  return v;
}

ConfigSpec config_spec(const YAML::Node& node, std::uint32_t n, ProcessId leader) {
  if (node.IsScalar()) {
    ConfigSpec spec;
    spec.n = n;
    spec.leader = leader;
    try {
      spec.preset = parse_preset(node.as<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(node, e.what());
    }
    return spec;
  }
  expect_keys(node, "configuration", {"preset", "leader", "transfers"});
  ConfigSpec spec;
  spec.n = n;
  spec.leader = leader;
  if (!node["preset"]) fail(node, "configuration needs a preset");
  try {
    spec.preset = parse_preset(scalar<std::string>(node["preset"], "preset"));
  } catch (const std::invalid_argument& e) {
    fail(node["preset"], e.what());
  }
  if (node["leader"]) spec.leader = process(node["leader"]);
  if (const auto transfers = node["transfers"]) {
    if (!transfers.IsSequence()) fail(transfers, "transfers must be a list such as [\"B.0=D\"]");
    for (const auto& t : transfers) {
      try {
        spec.transfers.push_back(parse_transfer(scalar<std::string>(t, "transfer")));
      } catch (const std::invalid_argument& e) {
        fail(t, e.what());
      }
    }
  }
  try {
    (void)spec.build();
  } catch (const std::exception& e) {
    fail(node, e.what());
  }
  return spec;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0, e.msg);
  }
  if (!root || !root.IsMap()) throw ScenarioError(1, "scenario must be a YAML mapping");
  expect_keys(root, "scenario",
              {"name", "seed", "fanout", "time_budget", "cluster", "faults", "initial_config", "schedule", "workload",
               "checks"});

  Scenario sc;
  read_opt(root, "name", sc.name);
  read_opt(root, "time_budget", sc.time_budget);
  read_opt(root, "seed", sc.faults.rng_seed);
  if (const auto f = root["fanout"]) {
    const auto v = scalar<std::string>(f, "fanout");
    if (v == "closest") {
      sc.fanout = ReadFanout::closest;
    } else if (v == "broadcast") {
      sc.fanout = ReadFanout::broadcast;
    } else {
      fail(f, "fanout must be closest or broadcast");
    }
  }

  const auto cluster = root["cluster"];
  if (!cluster) fail(root, "missing 'cluster' section");
  expect_keys(cluster, "cluster", {"n", "leader", "rtt", "latency"});
  if (!cluster["n"]) fail(cluster, "cluster needs n");
  sc.n = scalar<std::uint32_t>(cluster["n"], "n");
  if (sc.n == 0 || sc.n > kMaxProcesses) fail(cluster["n"], "n must be in [1, 64]");
  if (cluster["leader"]) sc.leader = process(cluster["leader"]);
  if (sc.leader.value >= sc.n) fail(cluster["leader"], "leader outside the cluster");
  if (cluster["rtt"] && cluster["latency"]) fail(cluster, "give either rtt or latency, not both");
  if (const auto m = cluster["latency"]) {
    if (!m.IsSequence() || m.size() != sc.n) fail(m, "latency must be an n x n list of lists");
    std::vector<std::vector<std::uint64_t>> rtt;
    for (const auto& row : m) {
      if (!row.IsSequence() || row.size() != sc.n) fail(row, "latency row must have n entries");
      auto& r = rtt.emplace_back();
      for (const auto& cell : row) r.push_back(scalar<std::uint64_t>(cell, "latency entry"));
    }
    try {
      sc.latency = LatencyMatrix(std::move(rtt));
    } catch (const std::invalid_argument& e) {
      fail(m, e.what());
    }
  } else {
    std::uint64_t rtt = 10;
    read_opt(cluster, "rtt", rtt);
    sc.latency = LatencyMatrix::uniform(sc.n, rtt);
  }

  if (const auto f = root["faults"]) {
    expect_keys(f, "faults", {"drop_rate", "duplicate_rate", "jitter", "retransmit", "retransmit_timeout"});
    if (f["drop_rate"]) sc.faults.drop_rate = unit_rate(f["drop_rate"], "drop_rate");
    if (f["duplicate_rate"]) sc.faults.duplicate_rate = unit_rate(f["duplicate_rate"], "duplicate_rate");
    read_opt(f, "jitter", sc.faults.reorder_jitter);
    read_opt(f, "retransmit", sc.faults.retransmit);
    read_opt(f, "retransmit_timeout", sc.faults.retransmit_timeout);
  }

  if (const auto c = root["initial_config"]) {
    sc.initial = config_spec(c, sc.n, sc.leader);
  } else {
    sc.initial = ConfigSpec{Preset::majority, sc.n, sc.leader, {}};
  }

  if (const auto s = root["schedule"]) {
    if (!s.IsSequence()) fail(s, "schedule must be a list");
    for (const auto& entry : s) {
      expect_keys(entry, "schedule entry", {"at", "config"});
      if (!entry["at"] || !entry["config"]) fail(entry, "schedule entry needs 'at' and 'config'");
      sc.schedule.push_back(
          ScheduledReconfig{scalar<std::uint64_t>(entry["at"], "at"), config_spec(entry["config"], sc.n, sc.leader)});
    }
  }

  if (const auto w = root["workload"]) {
    expect_keys(w, "workload", {"ops", "read_ratio", "key_space", "placement", "interarrival", "start", "script"});
    read_opt(w, "ops", sc.workload.total_ops);
    if (w["read_ratio"]) sc.workload.read_ratio = unit_rate(w["read_ratio"], "read_ratio");
    read_opt(w, "key_space", sc.workload.key_space);
    if (sc.workload.key_space == 0) fail(w["key_space"], "key_space must be positive");
    read_opt(w, "start", sc.workload.start_time);
    if (const auto ia = w["interarrival"]) {
      if (!ia.IsSequence() || ia.size() != 2) fail(ia, "interarrival must be [min, max]");
      sc.workload.interarrival_min = scalar<std::uint64_t>(ia[0], "interarrival min");
      sc.workload.interarrival_max = scalar<std::uint64_t>(ia[1], "interarrival max");
      if (sc.workload.interarrival_min > sc.workload.interarrival_max) fail(ia, "interarrival min exceeds max");
    }
    if (const auto pl = w["placement"]) {
      if (!pl.IsMap()) fail(pl, "placement must map process names to shares");
      sc.workload.placement.assign(sc.n, 0.0);
      for (const auto& kv : pl) {
        const auto p = process(kv.first);
        if (p.value >= sc.n) fail(kv.first, "placement names a process outside the cluster");
        const auto share = scalar<double>(kv.second, "placement share");
        if (share < 0) fail(kv.second, "placement shares must be non-negative");
        sc.workload.placement[p.value] = share;
      }
    }
    if (const auto script = w["script"]) {
      if (!script.IsSequence()) fail(script, "script must be a list of operations");
      for (const auto& op : script) {
        expect_keys(op, "script entry", {"at", "origin", "op", "key", "value"});
        if (!op["at"] || !op["origin"] || !op["op"] || !op["key"]) fail(op, "script entry needs at, origin, op, key");
        ScriptedOp s;
        s.time = scalar<std::uint64_t>(op["at"], "at");
        s.origin = process(op["origin"]);
        if (s.origin.value >= sc.n) fail(op["origin"], "origin outside the cluster");
        const auto kind = scalar<std::string>(op["op"], "op");
        if (kind == "put") {
          s.kind = OpKind::put;
        } else if (kind == "get") {
          s.kind = OpKind::get;
        } else {
          fail(op["op"], "op must be put or get");
        }
        s.key = scalar<std::string>(op["key"], "key");
        read_opt(op, "value", s.value);
        sc.workload.script.push_back(std::move(s));
      }
    }
  }

  if (const auto c = root["checks"]) {
    expect_keys(c, "checks", {"oracle", "linearizability", "lin_bound"});
    read_opt(c, "oracle", sc.checks.oracle);
    read_opt(c, "linearizability", sc.checks.linearizability);
    read_opt(c, "lin_bound", sc.checks.lin_bound);
  }

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(0, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace chameleon::sim
