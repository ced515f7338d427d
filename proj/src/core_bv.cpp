#include "pmcm/core_bv.hpp"

#include "pmcm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace pmcm {

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

double ipow(double r, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= r;
  return out;
}

void RadialDomain::validate() const {
  if (n < 2) throw ConfigError("domain: n must be >= 2");
  if (!(r_a > 0.0)) throw ConfigError("domain: r_a must be positive");
  if (!(r_a < r_b)) throw ConfigError("domain: r_a must be < r_b");
  if (!(r_b < R_B)) throw ConfigError("domain: R_B must exceed r_b");
}

double RadialDomain::shell_volume(double lo, double hi) const {
  return unit_ball_volume(n) * (ipow(hi, n) - ipow(lo, n));
}

SnappedNode snap_to_grid(const std::vector<double>& grid, double radius) {
  auto it = std::lower_bound(grid.begin(), grid.end(), radius);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (k == grid.size()) k = grid.size() - 1;
  if (k > 0 && std::abs(grid[k - 1] - radius) <= std::abs(grid[k] - radius)) --k;
  return {k, std::abs(grid[k] - radius)};
}

Jump make_jump(const std::vector<double>& grid, double radius, double inner, double outer) {
  const SnappedNode s = snap_to_grid(grid, radius);
  Jump j;
  j.node = s.node;
  j.snap = s.distance;
  j.u_minus = std::min(inner, outer);
  j.u_plus = std::max(inner, outer);
  j.orientation = outer >= inner ? 1 : -1;
  return j;
}

RadialProfile::RadialProfile(RadialDomain domain, std::vector<double> grid, std::vector<double> values,
                             std::vector<Jump> jumps)
    : domain_(domain), grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps)) {
  domain_.validate();
  if (grid_.size() < 2) throw ConfigError("profile: grid needs at least two nodes");
  if (values_.size() != grid_.size()) throw ConfigError("profile: values must match the grid");
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    if (!(grid_[k] < grid_[k + 1])) throw ConfigError("profile: grid must be strictly increasing");
  const double scale = domain_.r_b - domain_.r_a;
  if (std::abs(grid_.front() - domain_.r_a) > 1e-12 * scale || std::abs(grid_.back() - domain_.r_b) > 1e-12 * scale)
    throw ConfigError("profile: grid must cover [r_a, r_b]");
  for (double v : values_)
    if (!std::isfinite(v)) throw ConfigError("profile: non-finite value");
  std::sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.node < b.node; });
  jump_index_.assign(grid_.size(), -1);
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    const Jump& j = jumps_[k];
    if (j.node == 0 || j.node + 1 >= grid_.size()) throw ConfigError("profile: jump must lie strictly inside");
    if (jump_index_[j.node] >= 0) throw ConfigError("profile: two jumps at one node");
    if (!(j.u_plus > j.u_minus)) throw ConfigError("profile: degenerate jump record");
    if (j.orientation != 1 && j.orientation != -1) throw ConfigError("profile: orientation must be +-1");
    if (!std::isfinite(j.u_plus) || !std::isfinite(j.u_minus)) throw ConfigError("profile: non-finite jump");
    const double in = j.inner();
    if (std::abs(values_[j.node] - in) > 1e-12 * (1.0 + std::abs(in)))
      throw ConfigError("profile: node value must equal the inner jump limit");
    values_[j.node] = in;
    jump_index_[j.node] = static_cast<int>(k);
  }
}

const Jump* RadialProfile::jump_at(std::size_t node) const {
  const int k = jump_index_[node];
  return k < 0 ? nullptr : &jumps_[static_cast<std::size_t>(k)];
}

double RadialProfile::outer(std::size_t node) const {
  const Jump* j = jump_at(node);
  return j ? j->outer() : values_[node];
}

double RadialProfile::slope(std::size_t cell) const {
  return (values_[cell + 1] - outer(cell)) / cell_width(cell);
}

double RadialProfile::cell_volume(std::size_t cell) const {
  return domain_.shell_volume(grid_[cell], grid_[cell + 1]);
}

double RadialProfile::value(double r, int side) const {
  if (r <= grid_.front()) return values_.front();
  if (r >= grid_.back()) return values_.back();
  auto it = std::lower_bound(grid_.begin(), grid_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin());
  if (*it == r) return side < 0 ? inner(k) : outer(k);
  const std::size_t c = k - 1;
  const double t = (r - grid_[c]) / cell_width(c);
  return (1.0 - t) * outer(c) + t * values_[c + 1];
}

double RadialProfile::sup_abs() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  for (const Jump& j : jumps_) s = std::max({s, std::abs(j.u_plus), std::abs(j.u_minus)});
  return s;
}

nlohmann::json RadialProfile::to_json() const {
  nlohmann::json j;
  j["n"] = domain_.n;
  j["r_a"] = domain_.r_a;
  j["r_b"] = domain_.r_b;
  j["R_B"] = domain_.R_B;
  j["grid"] = grid_;
  j["values"] = values_;
  nlohmann::json js = nlohmann::json::array();
  for (const Jump& jp : jumps_)
    js.push_back({{"r", grid_[jp.node]}, {"u_minus", jp.u_minus}, {"u_plus", jp.u_plus}, {"orientation", jp.orientation}});
  j["jumps"] = js;
  return j;
}

RadialProfile RadialProfile::from_json(const nlohmann::json& j) {
  RadialDomain d{j.at("n").get<int>(), j.at("r_a").get<double>(), j.at("r_b").get<double>(), j.at("R_B").get<double>()};
  auto grid = j.at("grid").get<std::vector<double>>();
  auto values = j.at("values").get<std::vector<double>>();
  std::vector<Jump> jumps;
  if (j.contains("jumps")) {
    for (const auto& e : j.at("jumps")) {
      Jump jp;
      const SnappedNode s = snap_to_grid(grid, e.at("r").get<double>());
      jp.node = s.node;
      jp.snap = s.distance;
      jp.u_minus = e.at("u_minus").get<double>();
      jp.u_plus = e.at("u_plus").get<double>();
      jp.orientation = e.at("orientation").get<int>();
      jumps.push_back(jp);
    }
  }
  return RadialProfile(d, std::move(grid), std::move(values), std::move(jumps));
}

namespace {
void csv_row(std::ostringstream& os, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", a, b);
  os << buf;
}
}  // namespace

std::string RadialProfile::to_csv() const {
  std::ostringstream os;
  os << "r,u\n";
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    csv_row(os, grid_[k], values_[k]);
    if (const Jump* j = jump_at(k)) csv_row(os, grid_[k], j->outer());
  }
  return os.str();
}

double RadialField::sup_abs() const {
  double s = 0.0;
  for (std::size_t i = 0; i < flux.size(); ++i)
    s = std::max({s, std::abs(at(i, grid[i])), std::abs(at(i, grid[i + 1]))});
  return s;
}

RadialField RadialField::scaled(double c) const {
  RadialField out = *this;
  for (double& f : out.flux) f *= c;
  return out;
}

nlohmann::json RadialField::to_json() const {
  return {{"n", domain.n}, {"grid", grid}, {"flux", flux}};
}

std::string RadialField::to_csv() const {
  std::ostringstream os;
  os << "r_mid,T\n";
  for (std::size_t i = 0; i < flux.size(); ++i) csv_row(os, 0.5 * (grid[i] + grid[i + 1]), midpoint(i));
  return os.str();
}

GridFunction2D::GridFunction2D(double x0_, double y0_, std::size_t nx_, std::size_t ny_, double h_, double fill)
    : x0(x0_), y0(y0_), nx(nx_), ny(ny_), h(h_), values(nx_ * ny_, fill) {
  validate();
}

void GridFunction2D::validate() const {
  if (!(h > 0.0)) throw ConfigError("grid2d: spacing must be positive");
  if (nx < 2 || ny < 2) throw ConfigError("grid2d: need at least 2x2 nodes");
  if (values.size() != nx * ny) throw ConfigError("grid2d: value array does not match node count");
}

double total_variation(const RadialProfile& p) {
  const RadialDomain& d = p.domain();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) sum += std::abs(p.slope(i)) * p.cell_volume(i);
  for (const Jump& j : p.jumps()) sum += j.height() * d.sphere_area(p.grid()[j.node]);
  return sum;
}

double area_functional(const RadialProfile& p) {
  const RadialDomain& d = p.domain();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) sum += std::hypot(1.0, p.slope(i)) * p.cell_volume(i);
  for (const Jump& j : p.jumps()) sum += j.height() * d.sphere_area(p.grid()[j.node]);
  return sum;
}

double discrete_volume(const RadialProfile& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) sum += p.cell_volume(i);
  return sum;
}

double lambda_representative(double u_plus, double u_minus, double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (u_plus < u_minus) throw std::invalid_argument("u_plus must be >= u_minus");
  return lam * u_plus + (1.0 - lam) * u_minus;
}

double m_bound(double u_plus, double u_minus, double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (u_plus < u_minus) throw std::invalid_argument("u_plus must be >= u_minus");
  const double first = lam * std::abs(u_plus) + (1.0 - lam) * std::abs(u_minus);
  const double star = 0.5 * (u_plus + u_minus);
  const double second = std::abs(star) + std::abs(lam - 0.5) * (std::abs(u_plus) + std::abs(u_minus));
  return std::min(first, second);
}

RadialProfile truncate(const RadialProfile& p, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncation level must be positive");
  auto tk = [k](double v) { return std::clamp(v, -k, k); };
  std::vector<double> values = p.values();
  for (double& v : values) v = tk(v);
  std::vector<Jump> jumps;
  for (Jump j : p.jumps()) {
    j.u_minus = tk(j.u_minus);
    j.u_plus = tk(j.u_plus);
    if (j.u_plus > j.u_minus) jumps.push_back(j);
  }
  return RadialProfile(p.domain(), p.grid(), std::move(values), std::move(jumps));
}

}  // namespace pmcm
