#include "pmcm/radial_solver.hpp"

#include "pmcm/errors.hpp"
#include "pmcm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pmcm {

FieldCoefficients<double> field_coefficients(const RadialMeasure& m, const FieldAnchor& anchor) {
  m.validate();
  if (!m.atoms_only()) throw ConfigError("field_coefficients: measure must consist of atoms only");
  std::vector<std::pair<double, double>> atoms;
  for (const Atom& a : m.atoms) atoms.emplace_back(a.radius, a.weight);
  if (anchor.kind == FieldAnchor::Kind::JumpRule && anchor.index >= atoms.size())
    throw ConfigError("field_coefficients: jump rule names a missing atom");
  if (anchor.kind == FieldAnchor::Kind::Value && anchor.index > atoms.size())
    throw ConfigError("field_coefficients: anchor interval out of range");
  return propagate_field<double>(m.domain.n, m.domain.r_a, atoms, static_cast<int>(anchor.kind), anchor.index,
                                 anchor.gamma);
}

const char* to_string(JumpClass c) {
  switch (c) {
    case JumpClass::JumpUp: return "JumpUp";
    case JumpClass::JumpDown: return "JumpDown";
    case JumpClass::ContinuousOnly: return "ContinuousOnly";
    case JumpClass::Infeasible: return "Infeasible";
  }
  return "?";
}

JumpWindow<double> jump_classification(int n, double r_inner, double r_atom, double mu) {
  if (!(r_inner > 0.0 && r_inner < r_atom)) throw std::invalid_argument("jump_classification: need 0 < r_inner < r_atom");
  return classify_jump<double>(n, r_inner, r_atom, mu);
}

// ---------------------------------------------------------------------------

namespace {

// Magnitude of gamma checked against a^{n-1}; tiny overshoot from round-off
// is clamped.
double admissible_magnitude(double gamma, int n, double a) {
  const double q = ipow(a, n - 1);
  const double g = std::abs(gamma);
  if (g > q * (1.0 + 1e-13)) {
    std::ostringstream os;
    os << "|gamma| = " << g << " exceeds r^{n-1} = " << q << " at r = " << a;
    throw std::domain_error(os.str());
  }
  return std::min(g, q);
}

// theta with s^{n-1} = g cosh(theta); stable near theta = 0.
double theta_of(double q, double g) { return std::asinh(std::sqrt(std::max(0.0, (q - g) * (q + g))) / g); }

double s_of_theta(double g, double theta, int n) { return std::pow(g * std::cosh(theta), 1.0 / (n - 1)); }

enum class Kernel { Increment, Area, Conjugate };

double catenoid_integral(Kernel kind, double gamma, int n, double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("catenoid integral: need a <= b");
  if (a == b) return 0.0;
  const double g = admissible_magnitude(gamma, n, a);
  const int k = 2 * n - 2;
  if (g == 0.0) {
    if (kind == Kernel::Increment) return 0.0;
    return (ipow(b, n) - ipow(a, n)) / n;
  }
  const double sgn = gamma < 0.0 ? -1.0 : 1.0;
  const double q = ipow(a, n - 1);
  if (n == 2) {
    const double ta = theta_of(q, g), tb = theta_of(b, g);
    // s = g cosh(theta): closed forms
    auto prim = [&](double t) {
      switch (kind) {
        case Kernel::Increment: return sgn * g * t;
        case Kernel::Area: return g * g * (0.5 * t + 0.25 * std::sinh(2.0 * t));
        case Kernel::Conjugate: return g * g * (0.25 * std::sinh(2.0 * t) - 0.5 * t);
      }
      return 0.0;
    };
    return prim(tb) - prim(ta);
  }
  if (g <= 0.5 * q) {
    auto f = [&](double s) {
      const double p = ipow(s, k);
      const double root = std::sqrt(p - g * g);
      switch (kind) {
        case Kernel::Increment: return sgn * g / root;
        case Kernel::Area: return p / root;
        case Kernel::Conjugate: return root;
      }
      return 0.0;
    };
    return quad::adaptive(f, a, b);
  }
  const double ta = theta_of(q, g), tb = theta_of(ipow(b, n - 1), g);
  // ds = s^{2-n} g sinh(theta) dtheta / (n-1)
  auto f = [&](double t) {
    const double s = s_of_theta(g, t, n);
    const double jac = std::pow(s, 2 - n) / (n - 1);
    switch (kind) {
      case Kernel::Increment: return sgn * g * jac;
      case Kernel::Area: return g * g * std::cosh(t) * std::cosh(t) * jac;
      case Kernel::Conjugate: return g * g * std::sinh(t) * std::sinh(t) * jac;
    }
    return 0.0;
  };
  return quad::adaptive(f, ta, tb);
}

}  // namespace

double profile_increment(double gamma, int n, double a, double b) {
  return catenoid_integral(Kernel::Increment, gamma, n, a, b);
}
double catenoid_area(double gamma, int n, double a, double b) { return catenoid_integral(Kernel::Area, gamma, n, a, b); }
double conjugate_area(double gamma, int n, double a, double b) {
  return catenoid_integral(Kernel::Conjugate, gamma, n, a, b);
}

InvertedFlux invert_increment(int n, double a, double b, double du) {
  if (du == 0.0) return {0.0, false, 0.0};
  const double sgn = du < 0.0 ? -1.0 : 1.0;
  const double q = ipow(a, n - 1);
  const double target = std::abs(du);
  const double reach = profile_increment(q, n, a, b);
  if (target >= reach) return {sgn * q, true, target - reach};
  double lo = 0.0, hi = q;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (profile_increment(mid, n, a, b) < target) lo = mid; else hi = mid;
  }
  return {sgn * 0.5 * (lo + hi), false, 0.0};
}

std::vector<double> integrate_profile(double gamma, int n, double r_lo, double r_hi, double base,
                                      const std::vector<double>& grid) {
  if (!(r_lo < r_hi)) throw std::invalid_argument("integrate_profile: need r_lo < r_hi");
  admissible_magnitude(gamma, n, r_lo);
  std::vector<double> out(grid.size());
  double prev = r_lo, acc = base;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid[k];
    if (r < r_lo || r > r_hi || r < prev) throw std::invalid_argument("integrate_profile: grid must be sorted within [r_lo, r_hi]");
    acc += profile_increment(gamma, n, prev, r);
    out[k] = acc;
    prev = r;
  }
  return out;
}

// ---------------------------------------------------------------------------

RadialSolution::RadialSolution(RadialDomain domain, std::vector<SolutionPiece> pieces, double phi_a, double phi_b)
    : domain_(domain), pieces_(std::move(pieces)), phi_a_(phi_a), phi_b_(phi_b) {
  domain_.validate();
  if (pieces_.empty()) throw std::invalid_argument("solution: no pieces");
  if (pieces_.front().r_lo != domain_.r_a || pieces_.back().r_hi != domain_.r_b)
    throw std::invalid_argument("solution: pieces must cover [r_a, r_b]");
  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k)
    if (pieces_[k].r_hi != pieces_[k + 1].r_lo) throw std::invalid_argument("solution: pieces must be contiguous");
  const int n = domain_.n;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const SolutionPiece& p = pieces_[k];
    admissible_magnitude(p.gamma, n, p.r_lo);
    if (k + 1 == pieces_.size()) break;
    const double left = p.base + profile_increment(p.gamma, n, p.r_lo, p.r_hi);
    const double right = pieces_[k + 1].base;
    if (right != left) jumps_.push_back({p.r_hi, std::abs(right - left), right > left ? 1 : -1});
  }
  const SolutionPiece& last = pieces_.back();
  const double end = last.base + profile_increment(last.gamma, n, last.r_lo, last.r_hi);
  boundary_.inner_jump = pieces_.front().base - phi_a_;
  boundary_.outer_jump = phi_b_ - end;
  const double scale = 1.0 + std::abs(phi_a_) + std::abs(phi_b_);
  boundary_.inner_classical = std::abs(boundary_.inner_jump) <= 1e-12 * scale;
  boundary_.outer_classical = std::abs(boundary_.outer_jump) <= 1e-12 * scale;
}

std::vector<double> RadialSolution::gammas() const {
  std::vector<double> g;
  for (const SolutionPiece& p : pieces_) g.push_back(p.gamma);
  return g;
}

std::size_t RadialSolution::piece_index(double r, int side) const {
  if (r < domain_.r_a || r > domain_.r_b) throw std::out_of_range("radius outside the annulus");
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const SolutionPiece& p = pieces_[k];
    if (r > p.r_lo && r < p.r_hi) return k;
    if (r == p.r_lo && (side > 0 || k == 0)) return k;
    if (r == p.r_hi && (side < 0 || k + 1 == pieces_.size())) return k;
  }
  return pieces_.size() - 1;
}

double RadialSolution::value(double r, int side) const {
  const SolutionPiece& p = pieces_[piece_index(r, side)];
  return p.base + profile_increment(p.gamma, domain_.n, p.r_lo, r);
}

RadialProfile RadialSolution::sample(const std::vector<double>& grid) const {
  const int n = domain_.n;
  std::vector<double> values(grid.size());
  std::vector<Jump> jumps;
  std::size_t node = 0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const SolutionPiece& p = pieces_[k];
    const SnappedNode lo = snap_to_grid(grid, p.r_lo), hi = snap_to_grid(grid, p.r_hi);
    const double tol = 1e-12 * (domain_.r_b - domain_.r_a);
    if (lo.distance > tol || hi.distance > tol) throw ConfigError("sample: grid must contain every piece endpoint");
    std::vector<double> pts(grid.begin() + static_cast<long>(lo.node), grid.begin() + static_cast<long>(hi.node) + 1);
    pts.front() = p.r_lo;
    pts.back() = p.r_hi;
    const std::vector<double> u = integrate_profile(p.gamma, n, p.r_lo, p.r_hi, p.base, pts);
    if (k > 0) {
      const double inner = values[lo.node];
      if (u.front() != inner) jumps.push_back(make_jump(grid, p.r_lo, inner, u.front()));
    } else {
      values[0] = u.front();
    }
    for (std::size_t j = 1; j < u.size(); ++j) values[lo.node + j] = u[j];
    node = hi.node;
  }
  (void)node;
  return RadialProfile(domain_, grid, std::move(values), std::move(jumps));
}

RadialField RadialSolution::field(const std::vector<double>& grid) const {
  RadialField f{domain_, grid, std::vector<double>(grid.size() - 1)};
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) f.flux[i] = pieces_[piece_index(0.5 * (grid[i] + grid[i + 1]))].gamma;
  return f;
}

nlohmann::json RadialSolution::to_json() const {
  nlohmann::json j;
  j["gamma"] = gammas();
  nlohmann::json ps = nlohmann::json::array();
  for (const SolutionPiece& p : pieces_)
    ps.push_back({{"r_lo", p.r_lo}, {"r_hi", p.r_hi}, {"gamma", p.gamma}, {"base", p.base}});
  j["pieces"] = ps;
  nlohmann::json js = nlohmann::json::array();
  for (const SolutionJump& jp : jumps_) {
    const TraceLimits t = evaluate_T(*this, jp.radius);
    js.push_back({{"r", jp.radius}, {"height", jp.height}, {"direction", jp.direction}, {"T_inner", t.inner},
                  {"T_outer", t.outer}});
  }
  j["jumps"] = js;
  j["boundary"] = {{"inner_classical", boundary_.inner_classical},
                   {"outer_classical", boundary_.outer_classical},
                   {"inner_jump", boundary_.inner_jump},
                   {"outer_jump", boundary_.outer_jump}};
  return j;
}

TraceLimits evaluate_T(const RadialSolution& sol, double r) {
  const int n = sol.domain().n;
  const double rn = ipow(r, n - 1);
  const auto& ps = sol.pieces();
  return {ps[sol.piece_index(r, -1)].gamma / rn, ps[sol.piece_index(r, 1)].gamma / rn};
}

// ---------------------------------------------------------------------------

SolutionFamily::SolutionFamily(RadialSolution base, std::vector<std::size_t> pieces, double deficit, int direction)
    : base_(std::move(base)), pieces_(std::move(pieces)), deficit_(deficit), direction_(direction) {}

RadialSolution SolutionFamily::member(const std::vector<double>& heights) const {
  if (heights.size() != pieces_.size()) throw std::invalid_argument("family: one height per location");
  double sum = 0.0;
  for (double h : heights) {
    if (h < 0.0) throw std::invalid_argument("family: heights must be nonnegative");
    sum += h;
  }
  if (std::abs(sum - deficit_) > 1e-12 * (1.0 + deficit_)) throw std::invalid_argument("family: heights must sum to the deficit");
  std::vector<SolutionPiece> ps = base_.pieces();
  double offset = 0.0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (std::size_t l = 0; l < pieces_.size(); ++l)
      if (pieces_[l] == k) offset += direction_ * heights[l];
    ps[k].base += offset;
  }
  return RadialSolution(base_.domain(), std::move(ps), base_.phi_a(), base_.phi_b());
}

RadialSolution SolutionFamily::member(double t) const {
  if (pieces_.size() != 2) throw std::invalid_argument("family: scalar parameter needs exactly two locations");
  t = std::clamp(t, 0.0, deficit_);
  return member(std::vector<double>{t, deficit_ - t});
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Unique: return "unique";
    case SolveStatus::Family: return "family";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

RadialSolveResult solve_dirichlet_radial(const RadialMeasure& m, double phi_a, double phi_b) {
  m.validate();
  if (!m.atoms_only()) throw ConfigError("solve_dirichlet_radial: measure must consist of atoms only");
  const RadialDomain& d = m.domain;
  const int n = d.n;
  const std::size_t k = m.atoms.size();
  RadialSolveResult res;

  std::ostringstream diag;
  for (std::size_t i = 0; i < k; ++i) {
    const double inner = i == 0 ? d.r_a : m.atoms[i - 1].radius;
    res.windows.push_back(jump_classification(n, inner, m.atoms[i].radius, m.atoms[i].weight));
    if (res.windows.back().cls == JumpClass::Infeasible)
      diag << "necessary condition violated at r=" << m.atoms[i].radius << "; ";
  }
  res.L_hat = nonextremality(m, 1025).L_hat;
  if (res.L_hat >= 1.0) {
    diag << "measure is not non-extremal (L_hat=" << res.L_hat << ")";
    res.diagnostic = diag.str();
    return res;
  }

  std::vector<double> r_lo{d.r_a}, r_hi, c{0.0}, q{ipow(d.r_a, n - 1)};
  for (std::size_t i = 0; i < k; ++i) {
    r_hi.push_back(m.atoms[i].radius);
    r_lo.push_back(m.atoms[i].radius);
    c.push_back(c.back() + m.atoms[i].weight * ipow(m.atoms[i].radius, n - 1));
    q.push_back(ipow(m.atoms[i].radius, n - 1));
  }
  r_hi.push_back(d.r_b);

  double lo = -q[0] - c[0], hi = q[0] - c[0];
  std::size_t bind_lo = 0, bind_hi = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (-q[j] - c[j] > lo) lo = -q[j] - c[j], bind_lo = j;
    if (q[j] - c[j] < hi) hi = q[j] - c[j], bind_hi = j;
  }
  if (lo > hi) {
    diag << "no admissible flux: intervals " << bind_lo << " and " << bind_hi << " cannot both satisfy |gamma| <= r^{n-1}";
    res.diagnostic = diag.str();
    return res;
  }

  auto gamma_at = [&](double g1, std::size_t j) { return std::clamp(g1 + c[j], -q[j], q[j]); };
  auto total_increment = [&](double g1) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += profile_increment(gamma_at(g1, j), n, r_lo[j], r_hi[j]);
    return s;
  };
  auto build = [&](double g1, double base0, const std::vector<double>& extra) {
    std::vector<SolutionPiece> ps;
    double base = base0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double g = gamma_at(g1, j);
      base += extra[j];
      ps.push_back({r_lo[j], r_hi[j], g, base});
      base += profile_increment(g, n, r_lo[j], r_hi[j]);
    }
    return RadialSolution(d, std::move(ps), phi_a, phi_b);
  };

  res.increment_low = total_increment(lo);
  res.increment_high = total_increment(hi);
  const double D = phi_b - phi_a;
  std::vector<double> none(k + 1, 0.0);

  if (D >= res.increment_low && D <= res.increment_high) {
    double a = lo, b = hi;
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (total_increment(mid) < D) a = mid; else b = mid;
    }
    const double g1 = std::abs(total_increment(a) - D) <= std::abs(total_increment(b) - D) ? a : b;
    res.status = SolveStatus::Unique;
    res.solution = build(g1, phi_a, none);
    diag << "continuous solution";
    res.diagnostic = diag.str();
    return res;
  }

  const int dir = D > res.increment_high ? 1 : -1;
  const double g1 = dir > 0 ? hi : lo;
  const double deficit = dir > 0 ? D - res.increment_high : res.increment_low - D;
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j <= k; ++j) {
    const double g = g1 + c[j];
    if (std::abs(g - dir * q[j]) > 1e-12 * q[j]) continue;
    if (j > 0 && (m.atoms[j - 1].weight > 0.0) != (dir > 0)) continue;
    active.push_back(j);
  }
  if (active.empty()) {
    diag << "saturated anchor without an admissible jump sphere";
    res.diagnostic = diag.str();
    return res;
  }
  std::vector<double> extra(k + 1, 0.0);
  extra[active.front()] = dir * deficit;
  RadialSolution first = build(g1, phi_a, extra);
  if (active.size() == 1) {
    res.status = SolveStatus::Unique;
    res.solution = first;
    if (active.front() == 0)
      diag << "boundary datum at r_a attained through a boundary jump of height " << deficit;
    else
      diag << "jump of height " << deficit << " at r=" << r_lo[active.front()];
    res.diagnostic = diag.str();
    return res;
  }
  res.status = SolveStatus::Family;
  res.family = SolutionFamily(build(g1, phi_a, none), active, deficit, dir);
  res.solution = first;
  diag << "family of solutions: height " << deficit << " shared between " << active.size() << " spheres";
  res.diagnostic = diag.str();
  return res;
}

// ---------------------------------------------------------------------------

namespace {

double atom_term(const RadialMeasure& m, double inner, double outer, double weight, double radius) {
  const double u_lam = weight > 0.0 ? std::min(inner, outer) : std::max(inner, outer);
  return m.domain.sphere_area(radius) * weight * u_lam;
}

}  // namespace

double energy_radial(const RadialSolution& sol, const RadialMeasure& m) {
  const RadialDomain& d = sol.domain();
  const int n = d.n;
  const double area_unit = unit_sphere_area(n);
  double e = d.outside_volume();
  for (const SolutionPiece& p : sol.pieces()) e += area_unit * catenoid_area(p.gamma, n, p.r_lo, p.r_hi);
  for (const SolutionJump& j : sol.jumps()) e += d.sphere_area(j.radius) * j.height;
  e += d.sphere_area(d.r_a) * std::abs(sol.boundary().inner_jump);
  e += d.sphere_area(d.r_b) * std::abs(sol.boundary().outer_jump);
  for (const Atom& a : m.atoms) e += atom_term(m, sol.value(a.radius, -1), sol.value(a.radius, 1), a.weight, a.radius);
  if (!m.density.empty())
    e += area_unit * m.density.integrate([&](double s) { return sol.value(s); }, n, d.r_a, d.r_b);
  return e;
}

double energy_radial(const RadialProfile& p, const RadialMeasure& m, double phi_a, double phi_b) {
  const RadialDomain& d = p.domain();
  double e = d.outside_volume() + area_functional(p);
  e += d.sphere_area(d.r_a) * std::abs(p.trace_inner() - phi_a);
  e += d.sphere_area(d.r_b) * std::abs(phi_b - p.trace_outer());
  for (const Atom& a : m.atoms) e += atom_term(m, p.value(a.radius, -1), p.value(a.radius, 1), a.weight, a.radius);
  if (!m.density.empty()) {
    std::vector<double> breaks = m.density.breakpoints();
    breaks.insert(breaks.end(), p.grid().begin(), p.grid().end());
    e += unit_sphere_area(d.n) * quad::split_gauss8(
                                     [&](double s) { return p.value(s) * m.density.value(s, d.n) * ipow(s, d.n - 1); },
                                     d.r_a, d.r_b, breaks, 1);
  }
  return e;
}

}  // namespace pmcm
