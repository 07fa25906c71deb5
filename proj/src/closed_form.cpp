#include "hhm/closed_form.hpp"

#include <cmath>
#include <complex>

#include "hhm/errors.hpp"
#include "hhm/geometry.hpp"

namespace hhm {

namespace {

using Complex = std::complex<double>;

// u = (Re f, Im f) for holomorphic f on the unit disc.
class HolomorphicMap : public Mapping {
 public:
  explicit HolomorphicMap(std::string id) : id_(std::move(id)) {}
  int dim() const override { return 2; }
  int target_dim() const override { return 2; }
  std::string id() const override { return id_; }
  bool has_analytic_jacobian() const override { return true; }

  Vec value(VecView x) const override {
    check(x);
    const Complex v = f(Complex(x[0], x[1]));
    return {v.real(), v.imag()};
  }

  Matrix analytic_jacobian(VecView x) const override {
    check(x);
    const Complex d = df(Complex(x[0], x[1]));
    Matrix j(2, 2);
    j(0, 0) = d.real();
    j(0, 1) = -d.imag();
    j(1, 0) = d.imag();
    j(1, 1) = d.real();
    return j;
  }

 protected:
  virtual Complex f(Complex z) const = 0;
  virtual Complex df(Complex z) const = 0;

 private:
  void check(VecView x) const {
    if (x.size() != 2) throw_invalid("'" + id_ + "' is defined for n = 2 only");
    require_interior(x, id_.c_str());
  }
  std::string id_;
};

class LacunaryMap : public HolomorphicMap {
 public:
  LacunaryMap(std::string id, double alpha, int terms)
      : HolomorphicMap(std::move(id)), alpha_(alpha), terms_(terms) {}

 protected:
  Complex f(Complex z) const override {
    Complex sum = 0.0, p = z;  // p = z^(2^k)
    for (int k = 0; k < terms_; ++k) {
      sum += std::exp2(k * alpha_) * p;
      p *= p;
    }
    return sum;
  }
  Complex df(Complex z) const override {
    Complex sum = 0.0, q = 1.0;  // q = z^(2^k - 1)
    for (int k = 0; k < terms_; ++k) {
      sum += std::exp2(k * (alpha_ + 1.0)) * q;
      q = q * q * z;
    }
    return sum;
  }

 private:
  double alpha_;
  int terms_;
};

class PowerSingularityMap : public HolomorphicMap {
 public:
  PowerSingularityMap(std::string id, double gamma) : HolomorphicMap(std::move(id)), gamma_(gamma) {}

 protected:
  Complex f(Complex z) const override { return std::pow(1.0 - z, -gamma_); }
  Complex df(Complex z) const override { return gamma_ * std::pow(1.0 - z, -gamma_ - 1.0); }

 private:
  double gamma_;
};

class PolynomialMap : public Mapping {
 public:
  explicit PolynomialMap(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  int target_dim() const override { return 1; }
  std::string id() const override { return "poly"; }
  bool has_analytic_jacobian() const override { return true; }

  Vec value(VecView x) const override {
    require_interior(x, "poly");
    const double s = norm2(x);
    return {x[0] * x[0] * x[1] + s * s + x[0]};
  }

  Matrix analytic_jacobian(VecView x) const override {
    require_interior(x, "poly");
    const double s = norm2(x);
    Matrix j(1, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) j(0, i) = 4.0 * s * x[i];
    j(0, 0) += 2.0 * x[0] * x[1] + 1.0;
    j(0, 1) += x[0] * x[0];
    return j;
  }

 private:
  int dim_;
};

}  // namespace

bool is_closed_form(const std::string& spec) {
  const std::string id = spec.substr(0, spec.find(':'));
  return id == "lacunary" || id == "powersing" || id == "poly";
}

MappingPtr make_closed_form(const std::string& spec, int dim) {
  const MapSpec s = MapSpec::parse(spec);
  if (s.id == "lacunary" || s.id == "powersing") {
    if (dim != 2) throw_invalid("'" + s.id + "' is defined for n = 2 only");
  }
  if (s.id == "lacunary") {
    s.allow_only({"alpha", "terms"});
    const double alpha = s.number("alpha", 1.0);
    const int terms = s.integer("terms", 40);
    if (!(alpha > 0.0) || terms < 1 || terms > 60) {
      throw_invalid("lacunary needs alpha > 0 and 1 <= terms <= 60 in '" + spec + "'");
    }
    return std::make_shared<LacunaryMap>(spec, alpha, terms);
  }
  if (s.id == "powersing") {
    s.allow_only({"gamma"});
    const double gamma = s.number("gamma", 1.5);
    if (!(gamma > 0.0)) throw_invalid("powersing needs gamma > 0 in '" + spec + "'");
    return std::make_shared<PowerSingularityMap>(spec, gamma);
  }
  if (s.id == "poly") {
    s.allow_only({});
    if (dim < 2) throw_invalid("poly needs n >= 2");
    return std::make_shared<PolynomialMap>(dim);
  }
  throw_invalid("unknown closed-form map '" + s.id + "'");
}

}  // namespace hhm
