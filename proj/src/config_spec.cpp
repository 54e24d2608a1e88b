#include "chameleon/config_spec.hpp"

#include <stdexcept>

namespace chameleon {

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::leader: return "leader";
    case Preset::majority: return "majority";
    case Preset::flexible: return "flexible";
    case Preset::local: return "local";
  }
  return "?";
}

Preset parse_preset(std::string_view name) {
  if (name == "leader") return Preset::leader;
  if (name == "majority") return Preset::majority;
  if (name == "flexible") return Preset::flexible;
  if (name == "local") return Preset::local;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected leader, majority, flexible or local)");
}

TokenConfiguration ConfigSpec::build() const {
  if (!transfers.empty() && preset != Preset::flexible) {
    throw std::invalid_argument("token transfers are only allowed with the flexible preset");
  }
  switch (preset) {
    case Preset::leader: return mimic_leader(n, leader);
    case Preset::majority: return mimic_majority(n);
    case Preset::flexible: return mimic_flexible(n, transfers);
    case Preset::local: return mimic_local(n);
  }
  throw std::logic_error("unhandled preset");
}

std::string ConfigSpec::describe() const {
  std::string out(to_string(preset));
  if (preset == Preset::leader) out += "(" + to_string(leader) + ")";
  for (const auto& [token, to] : transfers) out += " " + to_string(token) + "->" + to_string(to);
  return out;
}

std::pair<Token, ProcessId> parse_transfer(std::string_view text) {
  auto sep = text.find("->");
  std::size_t skip = 2;
  if (sep == std::string_view::npos) {
    sep = text.find('=');
    skip = 1;
  }
  if (sep == std::string_view::npos) {
    throw std::invalid_argument("bad transfer '" + std::string(text) + "' (expected TOKEN=PROCESS, e.g. B.0=D)");
  }
  return {parse_token(text.substr(0, sep)), parse_process(text.substr(sep + skip))};
}

}  // namespace chameleon
