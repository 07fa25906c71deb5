#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hhm_cli {

// A configuration error; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchema = 1;

// Flat key = value document. Lines starting with '#' are comments; the
// optional key `schema` must equal kConfigSchema.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key, const std::string& fallback);
  double number(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key, std::int64_t fallback);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);

  // Keys under "prefix." that have not been read.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  void mark_used(const std::string& key) { used_.insert(key); }
  // Throws ConfigError naming the first key nobody read.
  void require_all_used() const;

  // FNV-1a 64 over the sorted key=value lines, skipping the given keys.
  std::uint64_t hash(const std::set<std::string>& excluded) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

double parse_number(const std::string& s, const std::string& key);

}  // namespace hhm_cli
