#include "hhm/mapping.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "hhm/errors.hpp"

namespace hhm {

Matrix Mapping::analytic_jacobian(VecView) const {
  throw_invalid("analytic jacobian is not available for map '" + id() + "'");
}

namespace {

double parse_number(const std::string& text, const std::string& key, const std::string& source) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw_invalid("bad number '" + text + "' for '" + key + "' in '" + source + "'");
  }
  return v;
}

}  // namespace

MapSpec MapSpec::parse(const std::string& text) {
  MapSpec spec;
  spec.source = text;
  std::stringstream ss(text);
  std::string token;
  bool first = true;
  while (std::getline(ss, token, ':')) {
    if (first) {
      spec.id = token;
      first = false;
      continue;
    }
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw_invalid("expected key=value, got '" + token + "' in '" + text + "'");
    }
    const std::string key = token.substr(0, eq);
    if (spec.args.count(key)) throw_invalid("duplicate key '" + key + "' in '" + text + "'");
    spec.args[key] = token.substr(eq + 1);
  }
  if (spec.id.empty()) throw_invalid("empty map id in '" + text + "'");
  return spec;
}

double MapSpec::number(const std::string& key, double fallback) const {
  auto it = args.find(key);
  return it == args.end() ? fallback : parse_number(it->second, key, source);
}

int MapSpec::integer(const std::string& key, int fallback) const {
  auto it = args.find(key);
  if (it == args.end()) return fallback;
  const double v = parse_number(it->second, key, source);
  if (v != static_cast<double>(static_cast<int>(v))) {
    throw_invalid("expected an integer for '" + key + "' in '" + source + "'");
  }
  return static_cast<int>(v);
}

std::string MapSpec::text(const std::string& key, const std::string& fallback) const {
  auto it = args.find(key);
  return it == args.end() ? fallback : it->second;
}

Vec MapSpec::numbers(const std::string& key, const Vec& fallback) const {
  auto it = args.find(key);
  if (it == args.end()) return fallback;
  Vec out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key, source));
  if (out.empty()) throw_invalid("empty list for '" + key + "' in '" + source + "'");
  return out;
}

void MapSpec::allow_only(std::initializer_list<const char*> allowed) const {
  for (const auto& [key, value] : args) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw_invalid("unknown parameter '" + key + "' for '" + id + "' in '" + source + "'");
  }
}

}  // namespace hhm
