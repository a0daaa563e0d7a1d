// Plain-text key=value configuration: '#' comments, one pair per line.
// Unknown and duplicate keys are rejected; numeric getters validate ranges.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvconfig {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Config {
public:
  static Config load(const std::string& path,
                     const std::set<std::string>& allowed_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), allowed_keys, path);
  }

  static Config parse(const std::string& text,
                      const std::set<std::string>& allowed_keys,
                      const std::string& origin = "<string>") {
    Config config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": expected key=value");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (!allowed_keys.count(key)) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      }
      if (config.values_.count(key)) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": duplicate key '" + key + "'");
      }
      config.values_[key] = value;
    }
    return config;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key, double fallback, double lo,
                    double hi) const {
    if (!has(key)) return check_range(key, fallback, lo, hi);
    return check_range(key, parse_double(key, get_string(key)), lo, hi);
  }

  double require_double(const std::string& key, double lo, double hi) const {
    return check_range(key, parse_double(key, get_string(key)), lo, hi);
  }

  long long get_int(const std::string& key, long long fallback, long long lo,
                    long long hi) const {
    const double v = get_double(key, static_cast<double>(fallback),
                                static_cast<double>(lo), static_cast<double>(hi));
    const long long r = static_cast<long long>(v);
    if (static_cast<double>(r) != v) {
      throw ConfigError("key '" + key + "' must be an integer");
    }
    return r;
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("key '" + key + "' must be an unsigned integer");
    }
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' must be an unsigned integer");
    }
  }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' has a non-numeric value '" + s + "'");
    }
  }

  static double check_range(const std::string& key, double v, double lo,
                            double hi) {
    if (!(v >= lo && v <= hi)) {
      throw ConfigError("key '" + key + "' = " + std::to_string(v) +
                        " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace kvconfig
