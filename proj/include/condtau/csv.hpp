#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "condtau/error.hpp"
#include "condtau/sample.hpp"

namespace condtau {

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses CSV text with header x1,x2,z1[,z2,...].
inline Sample parse_sample_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input, expected header x1,x2,z1", 1);
  ++line_no;
  const auto header = detail::split_commas(line);
  if (header.size() < 3 || detail::trim(header[0]) != "x1" || detail::trim(header[1]) != "x2")
    throw ParseError("header must be x1,x2,z1[,z2,...]", line_no);
  const std::size_t p = header.size() - 2;
  for (std::size_t d = 0; d < p; ++d)
    if (detail::trim(header[d + 2]) != "z" + std::to_string(d + 1))
      throw ParseError("header must be x1,x2,z1[,z2,...]", line_no);

  std::vector<double> x1, x2, z;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != p + 2)
      throw ParseError("expected " + std::to_string(p + 2) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    double v[2];
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value;
      if (!parse_double(cells[c], value))
        throw ParseError("non-numeric cell '" + std::string(detail::trim(cells[c])) + "'", line_no);
      if (!std::isfinite(value)) throw ParseError("non-finite value", line_no);
      if (c < 2)
        v[c] = value;
      else
        z.push_back(value);
    }
    x1.push_back(v[0]);
    x2.push_back(v[1]);
  }
  if (x1.size() < 2) throw ParseError("at least two data rows are required", line_no);
  return Sample(std::move(x1), std::move(x2), std::move(z), p);
}

inline Sample read_sample_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file: " + path);
  try {
    return parse_sample_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line());
  }
}

inline void write_sample_csv(std::ostream& out, const Sample& s) {
  out << "x1,x2";
  for (std::size_t d = 0; d < s.dim(); ++d) out << ",z" << d + 1;
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_double(s.x1(i)) << ',' << format_double(s.x2(i));
    for (double v : s.z(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

inline void write_sample_csv(const std::string& path, const Sample& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  write_sample_csv(out, s);
}

/// key = value lines; '#' and ';' start comments, [section] headers prefix
/// the keys that follow ("section.key"). Quotes around values are stripped.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    for (char c : {'#', ';'}) {
      const auto pos = v.find(c);
      if (pos != std::string_view::npos) v = v.substr(0, pos);
    }
    v = detail::trim(v);
    if (v.empty()) continue;
    if (v.front() == '[') {
      if (v.back() != ']') throw ParseError("unterminated section header", line_no);
      section = std::string(detail::trim(v.substr(1, v.size() - 2)));
      continue;
    }
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    std::string key(detail::trim(v.substr(0, eq)));
    std::string_view value = detail::trim(v.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    out[key] = std::string(value);
  }
  return out;
}

inline std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  try {
    return parse_key_values(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.message(), e.line());
  }
}

}  // namespace condtau
