#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace retmap::io {

/// 17 significant digits: every double survives a text round trip.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Ordered `# key: value` lines written above the column names.
class HeaderBlock {
 public:
  HeaderBlock& add(const std::string& key, const std::string& value) {
    lines_.emplace_back(key, value);
    return *this;
  }
  HeaderBlock& add(const std::string& key, double value) { return add(key, format_number(value)); }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : lines_) os << "# " << k << ": " << v << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const HeaderBlock& header, std::initializer_list<std::string> columns)
      : os_(os), width_(columns.size()) {
    header.write(os_);
    bool first = true;
    for (const auto& c : columns) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << "\n";
  }
  CsvWriter(std::ostream& os, const HeaderBlock& header, const std::vector<std::string>& columns)
      : os_(os), width_(columns.size()) {
    header.write(os_);
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }

  /// Cells are already-formatted strings; use cell() for numbers.
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::invalid_argument("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }

  static std::string cell(double v) { return format_number(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(const std::string& v) { return v; }

 private:
  std::ostream& os_;
  std::size_t width_;
};

}  // namespace retmap::io
