#include "chameleon/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace chameleon {

std::string to_string(ProcessId p) {
  if (p.value < 26) return std::string(1, static_cast<char>('A' + p.value));
  return "P" + std::to_string(p.value);
}

ProcessId parse_process(std::string_view text) {
  if (text.size() == 1 && std::isupper(static_cast<unsigned char>(text[0]))) {
    return ProcessId(static_cast<std::uint32_t>(text[0] - 'A'));
  }
  std::string_view digits = text;
  if (!digits.empty() && digits.front() == 'P') digits.remove_prefix(1);
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw std::invalid_argument("bad process name '" + std::string(text) + "'");
  }
  return ProcessId(id);
}

std::vector<ProcessId> ProcessSet::members() const {
  std::vector<ProcessId> out;
  out.reserve(size());
  for (std::uint64_t rest = bits_; rest != 0; rest &= rest - 1) {
    out.emplace_back(static_cast<std::uint32_t>(std::countr_zero(rest)));
  }
  return out;
}

bool lexicographic_less(ProcessSet a, ProcessSet b) {
  auto ma = a.members();
  auto mb = b.members();
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

std::string to_string(ProcessSet s) {
  std::string out = "{";
  bool first = true;
  for (auto p : s.members()) {
    if (!first) out += ',';
    out += to_string(p);
    first = false;
  }
  return out + "}";
}

std::string to_string(const Token& t) { return to_string(t.owner) + "." + std::to_string(t.rank); }

Token parse_token(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Token{parse_process(text), 0};
  auto rank_text = text.substr(dot + 1);
  std::uint32_t rank = 0;
  auto [ptr, ec] = std::from_chars(rank_text.data(), rank_text.data() + rank_text.size(), rank);
  if (rank_text.empty() || ec != std::errc{} || ptr != rank_text.data() + rank_text.size()) {
    throw std::invalid_argument("bad token '" + std::string(text) + "'");
  }
  return Token{parse_process(text.substr(0, dot)), rank};
}

}  // namespace chameleon
