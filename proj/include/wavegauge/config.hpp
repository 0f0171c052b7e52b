#pragma once

/// \file config.hpp
/// \brief Flat key = value configuration with [section] headers. Keys are
/// stored as "section.key" in file order; typed getters record which keys
/// were consumed so that unknown keys can be reported.

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wavegauge/grid.hpp"

namespace wavegauge::config {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace detail

class Config {
 public:
  Config() = default;

  /// Parses text; `source` names the input in error messages.
  static Config parse(std::istream& is, const std::string& source = "<config>") {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
      for (std::size_t i = 0; i < line.size(); ++i)
        if ((line[i] == '#' || line[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
          line.resize(i);
          break;
        }
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        if (!detail::valid_name(section)) throw ConfigError(where() + "invalid section name '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where() + "expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      if (!detail::valid_name(key)) throw ConfigError(where() + "invalid key '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.index_.count(full)) throw ConfigError(where() + "duplicate key '" + full + "'");
      c.insert(full, detail::trim(line.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse(f, path);
  }

  /// Sets or replaces a key (command-line overrides).
  void set(const std::string& key, const std::string& value) {
    if (!detail::valid_name(key)) throw ConfigError("invalid key '" + key + "'");
    const auto it = index_.find(key);
    if (it != index_.end())
      entries_[it->second].second = value;
    else
      insert(key, value);
  }

  bool has(const std::string& key) const { return index_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& def) const {
    const auto* v = find(key);
    return v ? *v : def;
  }

  double get_double(const std::string& key, double def) const {
    const auto* v = find(key);
    return v ? to_double(key, *v) : def;
  }

  int get_int(const std::string& key, int def) const {
    const auto* v = find(key);
    if (!v) return def;
    errno = 0;
    char* end = nullptr;
    const long x = std::strtol(v->c_str(), &end, 10);
    if (v->empty() || *end != '\0' || errno == ERANGE || x < -2147483647L || x > 2147483647L)
      throw ConfigError(key + ": expected an integer, got '" + *v + "'");
    return static_cast<int>(x);
  }

  bool get_bool(const std::string& key, bool def) const {
    const auto* v = find(key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
  }

  /// Whitespace-separated tokens of a value.
  std::vector<std::string> get_tokens(const std::string& key) const {
    std::vector<std::string> out;
    if (const auto* v = find(key)) {
      std::istringstream is(*v);
      std::string t;
      while (is >> t) out.push_back(t);
    }
    return out;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& t : get_tokens(key)) out.push_back(to_double(key, t));
    return out;
  }

  /// Keys "prefix<suffix>" in file order, e.g. all "geodesic.launch*".
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k.compare(0, prefix.size(), prefix) == 0) out.push_back(k);
    return out;
  }

  /// Throws ConfigError naming every key no getter has read.
  void require_all_used() const {
    std::string unknown;
    for (const auto& [k, v] : entries_)
      if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  void insert(const std::string& key, const std::string& value) {
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
  }

  const std::string* find(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    used_.insert(key);
    return &entries_[it->second].second;
  }

  static double to_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE)
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
  mutable std::set<std::string> used_;
};

}  // namespace wavegauge::config
