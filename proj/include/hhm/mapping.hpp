#pragma once

#include <map>
#include <memory>
#include <string>

#include "hhm/linalg.hpp"

namespace hhm {

// A map from the unit ball of R^dim to R^target_dim that can be evaluated at
// interior points.
class Mapping {
 public:
  virtual ~Mapping() = default;

  virtual int dim() const = 0;
  virtual int target_dim() const = 0;
  virtual Vec value(VecView x) const = 0;
  virtual std::string id() const = 0;

  // Rows are component gradients: (target_dim x dim).
  virtual bool has_analytic_jacobian() const { return false; }
  virtual Matrix analytic_jacobian(VecView x) const;

  // Largest |x| at which value() is trusted.
  virtual double guard_radius() const { return 1.0 - 1e-6; }
};

using MappingPtr = std::shared_ptr<const Mapping>;

// "id:key=value:key=value" strings used for boundary maps, closed-form maps,
// majorants.
struct MapSpec {
  std::string id;
  std::map<std::string, std::string> args;

  static MapSpec parse(const std::string& text);

  bool has(const std::string& key) const { return args.count(key) != 0; }
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  Vec numbers(const std::string& key, const Vec& fallback) const;  // comma separated
  // Throws InvalidArgument naming the map string if an argument is not in `allowed`.
  void allow_only(std::initializer_list<const char*> allowed) const;

  std::string source;
};

}  // namespace hhm
