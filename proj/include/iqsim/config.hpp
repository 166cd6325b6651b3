// config.hpp: flat `key = value` configuration with [sections].
//
//   # comment
//   experiment = two-qubit
//   [bath]
//   N = 100
//   temperatures = 0.1, 0.3, 0.5
//
// Every key must be consumed by the experiment that reads the file; leftovers are
// reported with their line numbers.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iqsim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class Config {
 public:
  struct Entry {
    std::string value;
    int line{0};
    mutable bool used{false};
  };

  static Config parse(std::istream& in, std::string source = "<config>") {
    Config c;
    c.source_ = std::move(source);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = trim(raw.substr(0, raw.find('#')));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(c.source_, line, "malformed section header '" + s + "'");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty() || !valid_name(section))
          throw ConfigError(c.source_, line, "invalid section name '" + section + "'");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(c.source_, line, "expected 'key = value', got '" + s + "'");
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (key.empty() || !valid_name(key)) throw ConfigError(c.source_, line, "invalid key '" + key + "'");
      if (value.empty()) throw ConfigError(c.source_, line, "missing value for '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (auto it = c.entries_.find(full); it != c.entries_.end())
        throw ConfigError(c.source_, line,
                          "duplicate key '" + full + "' (first set on line " + std::to_string(it->second.line) + ")");
      c.entries_.emplace(full, Entry{value, line});
    }
    return c;
  }

  static Config parse_string(const std::string& text, std::string source = "<string>") {
    std::istringstream in(text);
    return parse(in, std::move(source));
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    return parse(in, path);
  }

  // Command-line overrides replace or add a key.
  void set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0}; }

  const std::string& source() const noexcept { return source_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const { return lookup(key).value; }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const auto& e = lookup(key);
    return to_double(e.value, key, e.line);
  }
  double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

  int get_int(const std::string& key) const {
    const auto& e = lookup(key);
    return to_int(e.value, key, e.line);
  }
  int get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

  std::vector<double> get_doubles(const std::string& key) const {
    const auto& e = lookup(key);
    std::vector<double> out;
    for (const auto& item : split_list(e.value)) out.push_back(to_double(item, key, e.line));
    return out;
  }
  std::vector<int> get_ints(const std::string& key) const {
    const auto& e = lookup(key);
    std::vector<int> out;
    for (const auto& item : split_list(e.value)) out.push_back(to_int(item, key, e.line));
    return out;
  }
  std::vector<std::string> get_strings(const std::string& key) const { return split_list(lookup(key).value); }

  // Line number of a key, 0 when it came from the command line or is absent.
  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_, line_of(key), key + ": " + what);
  }

  void reject_unknown_keys() const {
    for (const auto& [key, e] : entries_)
      if (!e.used) throw ConfigError(source_, e.line, "unknown key '" + key + "'");
  }

  // Sorted `key = value` pairs, as echoed into output headers.
  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, e] : entries_) out.emplace_back(key, e.value);
    return out;
  }

 private:
  const Entry& lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_, 0, "missing required key '" + key + "'");
    it->second.used = true;
    return it->second;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static bool valid_name(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  double to_double(const std::string& s, const std::string& key, int line) const {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw ConfigError(source_, line, key + ": expected a number, got '" + s + "'");
    return v;
  }

  int to_int(const std::string& s, const std::string& key, int line) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError(source_, line, key + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace iqsim
