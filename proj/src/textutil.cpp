#include "prmh/textutil.hpp"

#include <cctype>

namespace prmh::text {

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower_ascii(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string normalize_token(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  auto strippable = [](char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return std::isspace(u) || c == '*' || c == '.' || c == ',' || c == '!' ||
           c == '?' || c == ':' || c == ';' || c == '"' || c == '\'';
  };
  while (b < e && strippable(s[b])) ++b;
  while (e > b && strippable(s[e - 1])) --e;
  return lower_ascii(s.substr(b, e - b));
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace prmh::text
