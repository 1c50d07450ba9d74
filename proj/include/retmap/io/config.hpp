#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "retmap/types.hpp"

namespace retmap::io {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Flat `key = value` text. Lines starting with '#' or ';' are comments.
/// A single `[params]` section holds scenario parameters; everything before
/// it is top level.
struct ConfigFile {
  std::string source;
  std::map<std::string, ConfigEntry> top;
  std::map<std::string, ConfigEntry> params;

  [[noreturn]] void fail(const ConfigEntry& e, const std::string& key, const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(e.line) + ": field '" + key + "': " + what);
  }
};

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline ConfigFile parse_config(std::istream& in, const std::string& source = "<config>") {
  ConfigFile cfg;
  cfg.source = source;
  auto* section = &cfg.top;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name != "params") fail("unknown section '" + name + "' (only [params] is allowed)");
      if (section == &cfg.params) fail("duplicate [params] section");
      section = &cfg.params;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key before '='");
    if (value.empty()) fail("field '" + key + "' has no value");
    if (section->count(key))
      fail("field '" + key + "' repeats line " + std::to_string(section->at(key).line));
    (*section)[key] = {value, line_no};
  }
  return cfg;
}

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

inline double to_double(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

inline long long to_integer(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(what + ": '" + text + "' is not an integer");
  return v;
}

/// Comma-separated numbers; surrounding parentheses are allowed.
inline std::vector<double> to_doubles(std::string text, const std::string& what) {
  text = trim(text);
  if (text.size() >= 2 && text.front() == '(' && text.back() == ')')
    text = text.substr(1, text.size() - 2);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), what));
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

}  // namespace retmap::io
