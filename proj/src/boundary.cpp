#include "hhm/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "hhm/errors.hpp"
#include "hhm/mapping.hpp"

namespace hhm {

BoundaryMap::BoundaryMap(int dim, int target_dim, std::string id, Fn fn)
    : dim_(dim), target_dim_(target_dim), id_(std::move(id)), fn_(std::move(fn)) {
  if (dim_ < 2) throw_invalid("boundary map dimension must be >= 2");
  if (target_dim_ < 1 || target_dim_ > dim_) {
    throw_invalid("boundary map '" + id_ + "' must have between 1 and " + std::to_string(dim_) +
                  " components");
  }
}

Vec BoundaryMap::operator()(VecView xi) const {
  if (static_cast<int>(xi.size()) != dim_) throw_invalid("boundary point dimension mismatch");
  Vec out(static_cast<std::size_t>(target_dim_));
  fn_(xi, out);
  return out;
}

namespace {

int one_based(const MapSpec& s, const char* key, int dim) {
  if (!s.has(key)) throw_invalid("missing '" + std::string(key) + "' in '" + s.source + "'");
  const int j = s.integer(key, 1);
  if (j < 1 || j > dim) {
    throw_invalid("'" + std::string(key) + "' must be in 1.." + std::to_string(dim) + " in '" +
                  s.source + "'");
  }
  return j - 1;
}

void require_plane(const MapSpec& s, int dim) {
  if (dim != 2) throw_invalid("'" + s.id + "' is defined for n = 2 only");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_invalid("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

BoundaryMap BoundaryMap::parse(const std::string& text, int dim) {
  if (dim < 2) throw_invalid("dimension must be >= 2");
  const MapSpec s = MapSpec::parse(text);
  const std::string& id = s.id;

  if (id == "const") {
    s.allow_only({"c"});
    const Vec c = s.numbers("c", Vec{1.0});
    if (!all_finite(c)) throw_invalid("non-finite constant in '" + text + "'");
    return BoundaryMap(dim, static_cast<int>(c.size()), text,
                       [c](VecView, std::span<double> out) { std::copy(c.begin(), c.end(), out.begin()); });
  }
  if (id == "coord") {
    s.allow_only({"j"});
    const int j = one_based(s, "j", dim);
    return BoundaryMap(dim, 1, text, [j](VecView xi, std::span<double> out) { out[0] = xi[j]; });
  }
  if (id == "identity") {
    s.allow_only({"scale"});
    const double scale = s.number("scale", 1.0);
    return BoundaryMap(dim, dim, text, [scale](VecView xi, std::span<double> out) {
      for (std::size_t i = 0; i < xi.size(); ++i) out[i] = scale * xi[i];
    });
  }
  if (id == "trig") {
    s.allow_only({"k", "component"});
    require_plane(s, dim);
    const int k = s.integer("k", 1);
    if (k < 0) throw_invalid("'k' must be >= 0 in '" + text + "'");
    const std::string comp = s.text("component", "cos");
    if (comp == "cos" || comp == "sin") {
      const bool use_cos = comp == "cos";
      return BoundaryMap(dim, 1, text, [k, use_cos](VecView xi, std::span<double> out) {
        const double th = std::atan2(xi[1], xi[0]);
        out[0] = use_cos ? std::cos(k * th) : std::sin(k * th);
      });
    }
    if (comp == "both") {
      return BoundaryMap(dim, 2, text, [k](VecView xi, std::span<double> out) {
        const double th = std::atan2(xi[1], xi[0]);
        out[0] = std::cos(k * th);
        out[1] = std::sin(k * th);
      });
    }
    throw_invalid("'component' must be cos, sin or both in '" + text + "'");
  }
  if (id == "product") {
    s.allow_only({"i", "j"});
    const int i = one_based(s, "i", dim);
    const int j = one_based(s, "j", dim);
    return BoundaryMap(dim, 1, text,
                       [i, j](VecView xi, std::span<double> out) { out[0] = xi[i] * xi[j]; });
  }
  if (id == "bump") {
    s.allow_only({"width", "gamma", "height", "center"});
    const double width = s.number("width", 0.5);
    const double gamma = s.number("gamma", 1.0);
    const double height = s.number("height", 1.0);
    Vec e1(static_cast<std::size_t>(dim), 0.0);
    e1[0] = 1.0;
    Vec center = s.numbers("center", e1);
    if (static_cast<int>(center.size()) != dim) {
      throw_invalid("'center' must have " + std::to_string(dim) + " entries in '" + text + "'");
    }
    const double cn = norm(center);
    if (cn == 0.0) throw_invalid("'center' must be nonzero in '" + text + "'");
    for (double& c : center) c /= cn;
    if (!(width > 0.0) || !(gamma > 0.0 && gamma <= 1.0)) {
      throw_invalid("bump needs width > 0 and gamma in (0,1] in '" + text + "'");
    }
    return BoundaryMap(dim, 1, text, [=](VecView xi, std::span<double> out) {
      const double t = std::max(0.0, 1.0 - distance(xi, center) / width);
      out[0] = height * std::pow(t, gamma);
    });
  }
  if (id == "perturb") {
    s.allow_only({"eps"});
    require_plane(s, dim);
    const double eps = s.number("eps", 0.2);
    if (!(std::fabs(eps) < 0.5)) throw_invalid("'eps' must satisfy |eps| < 1/2 in '" + text + "'");
    return BoundaryMap(dim, 2, text, [eps](VecView xi, std::span<double> out) {
      const double x = xi[0], y = xi[1];
      out[0] = x + eps * (x * x - y * y);
      out[1] = y - eps * 2.0 * x * y;
    });
  }
  if (id == "table") {
    s.allow_only({"values", "rule", "interp"});
    if (!s.has("values") || !s.has("rule")) {
      throw_invalid("table needs 'values' and 'rule' files in '" + text + "'");
    }
    const std::string interp = s.text("interp", "nearest");
    Interpolation mode;
    if (interp == "nearest") mode = Interpolation::Nearest;
    else if (interp == "linear") mode = Interpolation::Linear;
    else throw_invalid("'interp' must be nearest or linear in '" + text + "'");
    SphereRule rule = load_rule(s.text("rule", ""));
    if (rule.dim != dim) throw_invalid("table rule dimension does not match n in '" + text + "'");
    return from_table(read_file(s.text("values", "")), std::move(rule), mode, text);
  }
  throw_invalid("unknown boundary map '" + id + "'");
}

BoundaryMap BoundaryMap::from_table(const std::string& table_text, SphereRule rule,
                                    Interpolation interp, std::string id) {
  std::vector<Vec> values(rule.size());
  std::vector<bool> seen(rule.size(), false);
  std::istringstream in(table_text);
  std::string line;
  int width = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long index;
    if (!(ls >> index)) {
      std::string rest;
      if (std::istringstream(line) >> rest) {
        throw_invalid("table line " + std::to_string(line_no) + ": expected a node index");
      }
      continue;
    }
    Vec row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw_invalid("table line " + std::to_string(line_no) + ": bad value");
    if (index < 0 || static_cast<std::size_t>(index) >= rule.size()) {
      throw_invalid("table line " + std::to_string(line_no) + ": node index out of range");
    }
    if (width < 0) width = static_cast<int>(row.size());
    if (row.empty() || static_cast<int>(row.size()) != width) {
      throw_invalid("table line " + std::to_string(line_no) + ": inconsistent number of values");
    }
    if (seen[static_cast<std::size_t>(index)]) {
      throw_invalid("table line " + std::to_string(line_no) + ": duplicate node index");
    }
    seen[static_cast<std::size_t>(index)] = true;
    values[static_cast<std::size_t>(index)] = std::move(row);
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw_invalid("table is missing node " + std::to_string(i));
  }
  return tabulated(std::move(rule), std::move(values), interp, std::move(id));
}

namespace {

struct TableData {
  SphereRule rule;
  std::vector<Vec> values;
  Interpolation interp;
  std::map<std::vector<long long>, std::size_t> exact;  // quantised node -> index
  std::vector<std::size_t> by_angle;                     // n = 2 linear mode
  std::vector<double> angles;

  static std::vector<long long> key(VecView x) {
    std::vector<long long> k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::llround(x[i] * 1e11);
    return k;
  }

  void eval(VecView xi, std::span<double> out) const {
    auto hit = exact.find(key(xi));
    if (hit != exact.end()) {
      const Vec& v = values[hit->second];
      std::copy(v.begin(), v.end(), out.begin());
      return;
    }
    if (interp == Interpolation::Linear && rule.dim == 2) {
      const double th = std::atan2(xi[1], xi[0]);
      const std::size_t n = angles.size();
      std::size_t hi = static_cast<std::size_t>(
          std::upper_bound(angles.begin(), angles.end(), th) - angles.begin());
      const std::size_t lo = (hi + n - 1) % n;
      hi %= n;
      double span = angles[hi] - angles[lo];
      double off = th - angles[lo];
      if (span <= 0.0) span += 2.0 * std::numbers::pi;
      if (off < 0.0) off += 2.0 * std::numbers::pi;
      const double t = span > 0.0 ? off / span : 0.0;
      const Vec& a = values[by_angle[lo]];
      const Vec& b = values[by_angle[hi]];
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = (1.0 - t) * a[k] + t * b[k];
      return;
    }
    if (interp == Interpolation::Linear) {
      // Inverse-distance blend of the dim + 1 nearest nodes.
      const std::size_t want = std::min(rule.size(), static_cast<std::size_t>(rule.dim + 1));
      std::vector<std::pair<double, std::size_t>> best;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        best.emplace_back(distance(xi, rule.node(i)), i);
      }
      std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(want), best.end());
      std::fill(out.begin(), out.end(), 0.0);
      double total = 0.0;
      for (std::size_t r = 0; r < want; ++r) {
        const double w = 1.0 / std::max(best[r].first, 1e-300);
        total += w;
        const Vec& v = values[best[r].second];
        for (std::size_t k = 0; k < v.size(); ++k) out[k] += w * v[k];
      }
      for (double& o : out) o /= total;
      return;
    }
    std::size_t arg = 0;
    double best = -2.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double d = dot(xi, rule.node(i));
      if (d > best) {
        best = d;
        arg = i;
      }
    }
    const Vec& v = values[arg];
    std::copy(v.begin(), v.end(), out.begin());
  }
};

}  // namespace

BoundaryMap BoundaryMap::tabulated(SphereRule rule, std::vector<Vec> values, Interpolation interp,
                                   std::string id) {
  if (values.size() != rule.size() || values.empty()) {
    throw_invalid("tabulated boundary data must have one row per rule node");
  }
  const std::size_t width = values.front().size();
  for (const Vec& v : values) {
    if (v.size() != width || !all_finite(v)) throw_invalid("tabulated boundary data is ragged or non-finite");
  }
  auto data = std::make_shared<TableData>();
  data->interp = interp;
  for (std::size_t i = 0; i < rule.size(); ++i) data->exact.emplace(TableData::key(rule.node(i)), i);
  if (rule.dim == 2) {
    data->by_angle.resize(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) data->by_angle[i] = i;
    auto angle = [&](std::size_t i) { return std::atan2(rule.node(i)[1], rule.node(i)[0]); };
    std::sort(data->by_angle.begin(), data->by_angle.end(),
              [&](std::size_t a, std::size_t b) { return angle(a) < angle(b); });
    for (std::size_t i : data->by_angle) data->angles.push_back(angle(i));
  }
  const int dim = rule.dim;
  data->rule = std::move(rule);
  data->values = std::move(values);
  return BoundaryMap(dim, static_cast<int>(width), std::move(id),
                     [data](VecView xi, std::span<double> out) { data->eval(xi, out); });
}

std::vector<std::string> registry_boundary_specs(int dim) {
  if (dim == 2) {
    return {"const:c=1,0",   "coord:j=1",         "coord:j=2",
            "identity",      "identity:scale=0.5", "trig:k=3:component=both",
            "trig:k=5:component=sin", "product:i=1:j=2", "bump:width=0.8:gamma=1",
            "bump:width=1:gamma=0.5", "perturb:eps=0.2"};
  }
  std::string c = "const:c=1";
  for (int i = 1; i < dim; ++i) c += ",0";
  return {c, "coord:j=1", "identity", "product:i=1:j=" + std::to_string(dim),
          "bump:width=0.8:gamma=1"};
}

}  // namespace hhm
