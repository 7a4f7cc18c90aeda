#pragma once

// Minimal CSV reading for the small data tables: comma separated, no quoting,
// blank lines and lines starting with '#' ignored.

#include <string>
#include <string_view>
#include <vector>

namespace latent_morph::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Data rows (header included) with their 1-based line numbers.
inline std::vector<std::pair<int, std::vector<std::string>>> rows(std::string_view text) {
  std::vector<std::pair<int, std::vector<std::string>>> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++line_no;
    line = trim(line);
    if (!line.empty() && line.front() != '#') out.emplace_back(line_no, split(line));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace latent_morph::csv
