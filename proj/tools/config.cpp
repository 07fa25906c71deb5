#include "config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hhm_cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_number(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf" || t == "infinity") return INFINITY;
  if (t == "-inf") return -INFINITY;
  if (t.empty()) throw ConfigError("key '" + key + "': empty value, expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + t + "' is not a number");
  }
  return v;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    if (c.has(key)) throw ConfigError(origin + ":" + std::to_string(number) + ": key '" + key + "' repeated");
    c.values_[key] = trim(t.substr(eq + 1));
  }
  if (c.has("schema")) {
    if (c.values_["schema"] != std::to_string(kConfigSchema)) {
      throw ConfigError("key 'schema': unsupported schema '" + c.values_["schema"] + "', expected " +
                        std::to_string(kConfigSchema));
    }
  }
  c.used_.insert("schema");
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string Config::text(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::number(const std::string& key, double fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number(it->second, key);
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (it->second.empty() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + it->second + "' is not an integer");
  }
  return v;
}

std::uint64_t Config::unsigned_integer(const std::string& key, std::uint64_t fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (it->second.empty() || it->second[0] == '-' || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a non-negative integer");
  }
  return v;
}

bool Config::boolean(const std::string& key, bool fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(item, key));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

void Config::require_all_used() const {
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) throw ConfigError("unknown key '" + k + "'");
  }
}

std::uint64_t Config::hash(const std::set<std::string>& excluded) const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& [k, v] : values_) {
    if (excluded.count(k)) continue;
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace hhm_cli
