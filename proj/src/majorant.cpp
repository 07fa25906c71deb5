#include <cmath>

#include "hhm/analysis.hpp"
#include "hhm/errors.hpp"

namespace hhm {

Majorant Majorant::parse(const std::string& spec) {
  const MapSpec s = MapSpec::parse(spec);
  Majorant m;
  m.id_ = spec;
  if (s.id == "id") {
    s.allow_only({});
    m.kind_ = Kind::Identity;
  } else if (s.id == "power") {
    s.allow_only({"gamma"});
    m.kind_ = Kind::Power;
    m.gamma_ = s.number("gamma", 0.5);
    if (!(m.gamma_ > 0.0 && m.gamma_ <= 1.0)) throw_invalid("majorant power needs gamma in (0,1]");
  } else if (s.id == "log") {
    s.allow_only({});
    m.kind_ = Kind::Log;
  } else {
    throw_invalid("unknown majorant '" + s.id + "'");
  }
  return m;
}

double Majorant::operator()(double t) const {
  if (!(t >= 0.0)) throw_invalid("majorant argument must be >= 0");
  switch (kind_) {
    case Kind::Identity:
      return t;
    case Kind::Power:
      return std::pow(t, gamma_);
    case Kind::Log:
      return t == 0.0 ? 0.0 : t * (1.0 + std::log1p(1.0 / t));
  }
  return t;
}

}  // namespace hhm
