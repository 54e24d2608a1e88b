#include "chameleon/history.hpp"

#include <istream>
#include <set>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace chameleon {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(OpKind k) { return k == OpKind::put ? "put" : "get"; }

void write_history(std::ostream& out, const History& history) {
  for (const auto& e : history) {
    ordered_json j;
    j["op_id"] = e.op_id;
    j["kind"] = to_string(e.kind);
    j["key"] = e.key;
    j["value"] = e.value ? ordered_json(*e.value) : ordered_json(nullptr);
    j["origin"] = to_string(e.origin);
    j["invoke_time"] = e.invoke.time;
    j["invoke_seq"] = e.invoke.seq;
    j["response_time"] = e.response ? ordered_json(e.response->time) : ordered_json(nullptr);
    j["response_seq"] = e.response ? ordered_json(e.response->seq) : ordered_json(nullptr);
    j["assigned_index"] = e.assigned_index ? ordered_json(*e.assigned_index) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

History read_history(std::istream& in) {
  History history;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::uint64_t> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = ordered_json::parse(line);
      HistoryEvent e;
      e.op_id = j.at("op_id").get<std::uint64_t>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "put") {
        e.kind = OpKind::put;
      } else if (kind == "get") {
        e.kind = OpKind::get;
      } else {
        throw HistoryFormatError(line_no, "unknown kind '" + kind + "'");
      }
      e.key = j.at("key").get<std::string>();
      if (!j.at("value").is_null()) e.value = j.at("value").get<std::string>();
      e.origin = parse_process(j.at("origin").get<std::string>());
      e.invoke = Stamp{j.at("invoke_time").get<std::uint64_t>(), j.value("invoke_seq", std::uint64_t{0})};
      if (!j.at("response_time").is_null()) {
        const auto& seq = j.contains("response_seq") ? j.at("response_seq") : ordered_json(nullptr);
        e.response = Stamp{j.at("response_time").get<std::uint64_t>(), seq.is_null() ? 0 : seq.get<std::uint64_t>()};
      }
      if (j.contains("assigned_index") && !j.at("assigned_index").is_null()) {
        e.assigned_index = j.at("assigned_index").get<std::uint64_t>();
      }
      if (e.kind == OpKind::put && !e.value) throw HistoryFormatError(line_no, "put without a value");
      if (e.response && !(e.invoke < *e.response)) {
        throw HistoryFormatError(line_no, "response does not follow invocation");
      }
      if (!ids.insert(e.op_id).second) throw HistoryFormatError(line_no, "duplicate op_id " + std::to_string(e.op_id));
      history.push_back(std::move(e));
    } catch (const HistoryFormatError&) {
      throw;
    } catch (const std::exception& ex) {
      throw HistoryFormatError(line_no, ex.what());
    }
  }
  return history;
}

std::string describe(const HistoryEvent& e) {
  std::ostringstream s;
  s << "#" << e.op_id << " " << to_string(e.kind) << "(" << e.key;
  if (e.kind == OpKind::put) s << "," << e.value.value_or("");
  s << ")";
  if (e.kind == OpKind::get && e.complete()) s << " -> " << (e.value ? *e.value : std::string("<absent>"));
  s << " @" << to_string(e.origin) << " [" << e.invoke.time << ", ";
  if (e.response) {
    s << e.response->time;
  } else {
    s << "pending";
  }
  s << "]";
  if (e.assigned_index) s << " index " << *e.assigned_index;
  return s.str();
}

}  // namespace chameleon
