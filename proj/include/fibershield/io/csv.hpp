#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fibershield/error.hpp"

namespace fibershield::io {

inline std::string fmt(double v, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Comment lines start with '#'. The first one carries the run manifest hash so every
// output can be traced back to its inputs.
class CsvWriter {
 public:
  CsvWriter(std::string manifest_hash, std::vector<std::string> columns)
      : hash_(std::move(manifest_hash)), columns_(std::move(columns)) {}

  void comment(const std::string& line) { comments_.push_back(line); }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw AnalysisError("csv-shape", "row width does not match header");
    rows_.push_back(cells);
  }
  void row(const std::vector<double>& values, int digits = 12) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt(v, digits));
    row(cells);
  }

  std::string str() const {
    std::ostringstream o;
    o << "# fibershield manifest " << hash_ << '\n';
    for (const auto& c : comments_) o << "# " << c << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) o << (i ? "," : "") << columns_[i];
    o << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    }
    return o.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io", "cannot write '" + path + "'");
    out << str();
  }

 private:
  std::string hash_;
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ConfigError("parse", "missing CSV column '" + name + "'");
  }
  // First column whose name is one of `names`.
  std::size_t column_any(std::initializer_list<const char*> names) const {
    for (const char* n : names)
      for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == n) return i;
    std::string all;
    for (const char* n : names) all += std::string(all.empty() ? "" : "/") + n;
    throw ConfigError("parse", "missing CSV column " + all);
  }
  double number(std::size_t row, std::size_t col) const {
    const std::string& s = rows.at(row).at(col);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("parse", "not a number in CSV: '" + s + "'");
    }
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
  }
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    auto cells = split_csv_line(line);
    if (!header) {
      t.columns = std::move(cells);
      header = true;
    } else {
      if (cells.size() != t.columns.size()) throw ConfigError("parse", "CSV row has " + std::to_string(cells.size()) +
                                                                           " cells, header has " +
                                                                           std::to_string(t.columns.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (!header) throw ConfigError("parse", "CSV has no header line");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("missing-file", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace fibershield::io
