#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dduc/error.hpp"

namespace dduc::csv {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

// A header plus string cells. Blank lines and lines starting with '#' are skipped.
class Table {
 public:
  static Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidValue, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  static Table parse(const std::string& text, std::string name) {
    Table t;
    t.name_ = std::move(name);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++line_no;
      auto body = trim(line);
      if (first && body.rfind("\xEF\xBB\xBF", 0) == 0) body = trim(body.substr(3));
      if (body.empty() || body.front() == '#') continue;
      auto cells = split(body);
      if (first) {
        t.header_ = std::move(cells);
        first = false;
        continue;
      }
      if (cells.size() != t.header_.size())
        fail(ErrorKind::InvalidValue, t.name_ + " line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(t.header_.size()) + " fields, got " +
                                          std::to_string(cells.size()));
      t.rows_.push_back(std::move(cells));
      t.line_.push_back(line_no);
    }
    if (first) fail(ErrorKind::MissingColumn, t.name_ + ": missing header row");
    return t;
  }

  const std::string& name() const { return name_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  bool has(std::string_view col) const {
    for (const auto& h : header_)
      if (h == col) return true;
    return false;
  }

  std::size_t column(std::string_view col) const {
    for (std::size_t k = 0; k < header_.size(); ++k)
      if (header_[k] == col) return k;
    fail(ErrorKind::MissingColumn, name_ + ": missing column '" + std::string(col) + "'");
  }

  const std::string& text(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  double number(std::size_t row, std::size_t col) const {
    double v = 0.0;
    if (!parse_double(rows_[row][col], v))
      fail(ErrorKind::InvalidValue, where(row) + ": column '" + header_[col] + "' is not a number: '" +
                                        rows_[row][col] + "'");
    return v;
  }

  int integer(std::size_t row, std::size_t col) const {
    const double v = number(row, col);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      fail(ErrorKind::InvalidValue, where(row) + ": column '" + header_[col] + "' must be an integer");
    return static_cast<int>(v);
  }

  std::string where(std::size_t row) const { return name_ + " line " + std::to_string(line_[row]); }

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> line_;
};

}  // namespace dduc::csv
