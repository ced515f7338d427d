#include "pmcm/certificates.hpp"

#include "pmcm/quadrature.hpp"
#include "pmcm/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pmcm {

std::string CertificateReport::failed_conditions() const {
  std::string out;
  auto add = [&out](bool ok, const char* name) {
    if (ok) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(pass_bound, "bound");
  add(pass_pairing, "pairing");
  add(pass_divergence, "divergence");
  add(pass_t_formula, "t_formula");
  return out;
}

nlohmann::json CertificateReport::to_json() const {
  return {{"tol", tol},
          {"pass", pass()},
          {"conditions",
           {{"bound", {{"residual", sup_norm_T}, {"pass", pass_bound}, {"quantity", "sup |T|"}}},
            {"pairing", {{"residual", pairing_residual}, {"pass", pass_pairing}, {"quantity", "pairing TV distance"}}},
            {"divergence", {{"residual", div_residual}, {"pass", pass_divergence}, {"quantity", "div residual"}}},
            {"t_formula",
             {{"residual", t_formula_residual},
              {"jump_trace_residual", jump_trace_residual},
              {"pass", pass_t_formula},
              {"quantity", "T formula L1"}}}}}};
}

namespace {

void check_compatible(const RadialProfile& u, const RadialField& T) {
  if (T.grid != u.grid() || T.flux.size() + 1 != u.nodes()) throw std::invalid_argument("T is not sampled on u's carrier");
  if (T.domain.n != u.domain().n) throw std::invalid_argument("T and u live in different dimensions");
}

double lambda_at_node(const RadialProfile& u, const RadialMeasure& m, const HahnSplit& lam, std::size_t node) {
  const double r = u.grid()[node];
  const double tol = 1e-12 * (m.domain.r_b - m.domain.r_a);
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    if (std::abs(m.atoms[i].radius - r) <= tol) return lam.atom_lambda(i);
  return lam.density_lambda(r);
}

struct CellCatenoid {
  double gamma;
  double area;  // per n omega_n
};

CellCatenoid catenoid_through(const RadialProfile& u, std::size_t i) {
  const int n = u.domain().n;
  const double a = u.grid()[i], b = u.grid()[i + 1];
  const double du = u.values()[i + 1] - u.outer(i);
  const InvertedFlux f = invert_increment(n, a, b, du);
  double area = catenoid_area(f.gamma, n, a, b);
  if (f.saturated) area += f.excess * ipow(a, n - 1);
  return {f.gamma, area};
}

double clamp_flux(double gamma, int n, double a) {
  const double q = ipow(a, n - 1);
  return std::clamp(gamma, -q, q);
}

double bump(double r, double c, double w) {
  const double t = (r - c) / w;
  const double q = 1.0 - t * t;
  return q <= 0.0 ? 0.0 : std::exp(1.0 - 1.0 / q);
}

double bump_derivative(double r, double c, double w) {
  const double t = (r - c) / w;
  const double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return bump(r, c, w) * (-2.0 * t / (q * q)) / w;
}

}  // namespace

double divergence_residual(const RadialField& T, const RadialMeasure& m) {
  const RadialDomain& d = m.domain;
  const int n = d.n;
  const double area_unit = unit_sphere_area(n);
  const double c = 0.5 * (d.r_a + d.r_b), half = 0.5 * (d.r_b - d.r_a);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double w = half * (k + 1) / 20.0;
    double flux_term = 0.0;
    for (std::size_t i = 0; i < T.cells(); ++i) {
      const double a = T.grid[i], b = T.grid[i + 1];
      if (b <= c - w || a >= c + w) continue;
      flux_term += T.flux[i] * (bump(b, c, w) - bump(a, c, w));
    }
    double mass = 0.0;
    for (const Atom& at : m.atoms) mass += at.weight * ipow(at.radius, n - 1) * bump(at.radius, c, w);
    if (!m.density.empty())
      mass += m.density.integrate([&](double r) { return bump(r, c, w); }, n, std::max(d.r_a, c - w), std::min(d.r_b, c + w));
    const double norm = quad::composite_gauss8(
        [&](double r) { return (std::abs(bump(r, c, w)) + std::abs(bump_derivative(r, c, w))) * ipow(r, n - 1); },
        c - w, c + w, 64);
    worst = std::max(worst, std::abs(flux_term + mass) / norm);
  }
  (void)area_unit;  // both terms carry the same n omega_n factor
  return worst;
}

PairingBalance pairing_balance(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                               const HahnSplit& lam) {
  check_compatible(u, T);
  const int n = u.domain().n;
  const double area_unit = unit_sphere_area(n);
  const auto& g = u.grid();
  PairingBalance pb;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const double a = g[i], b = g[i + 1];
    const CellCatenoid cat = catenoid_through(u, i);
    const double gamma = clamp_flux(T.flux[i], n, a);
    const double du = u.values()[i + 1] - u.outer(i);
    const double lhs = area_unit * T.flux[i] * du;
    const double conj = area_unit * conjugate_area(gamma, n, a, b);
    const double rhs = area_unit * cat.area - conj;
    pb.area += area_unit * cat.area;
    pb.conjugate += conj;
    pb.pairing += lhs;
    pb.tv_distance += std::abs(lhs - rhs);
  }
  for (std::size_t j = 1; j + 1 < u.nodes(); ++j) {
    const double in = u.inner(j), out = u.outer(j);
    const double up = std::max(in, out), lo = std::min(in, out);
    const double lam_j = lambda_at_node(u, m, lam, j);
    const double u_lam = lam_j * up + (1.0 - lam_j) * lo;
    const double gl = T.flux[j - 1], gr = T.flux[j];
    const double lhs = area_unit * (out * gr - in * gl - u_lam * (gr - gl));
    const double rhs = u.domain().sphere_area(g[j]) * (up - lo);
    pb.area += rhs;
    pb.pairing += lhs;
    pb.tv_distance += std::abs(lhs - rhs);
  }
  return pb;
}

TFormulaResult check_T_formula(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                               const HahnSplit& lam, double tol) {
  check_compatible(u, T);
  const int n = u.domain().n;
  const double area_unit = unit_sphere_area(n);
  TFormulaResult out;
  for (std::size_t i = 0; i < u.cells(); ++i) {
    const CellCatenoid cat = catenoid_through(u, i);
    out.residual += area_unit * u.cell_width(i) * std::abs(T.flux[i] - cat.gamma);
  }
  for (const Jump& j : u.jumps()) {
    const double lam_j = lambda_at_node(u, m, lam, j.node);
    // nu_u points toward u+; the u+ side is outer when orientation is +1.
    const double t_in = j.orientation * T.trace_left(j.node);
    const double t_out = j.orientation * T.trace_right(j.node);
    const double t_plus = j.orientation > 0 ? t_out : t_in;
    const double t_minus = j.orientation > 0 ? t_in : t_out;
    const double t = lam_j * t_minus + (1.0 - lam_j) * t_plus;
    out.jump_trace_residual += u.domain().sphere_area(u.grid()[j.node]) * j.height() * std::abs(1.0 - t);
  }
  out.pass = out.residual <= tol && out.jump_trace_residual <= tol;
  return out;
}

TFormulaResult check_T_formula(const RadialProfile& u, const RadialField& T, double tol) {
  RadialMeasure zero;
  zero.domain = u.domain();
  return check_T_formula(u, T, zero, hahn_lambda(zero), tol);
}

CertificateReport verify_weak_solution(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                                       const HahnSplit& lam, double tol) {
  check_compatible(u, T);
  CertificateReport rep;
  rep.tol = tol;
  rep.sup_norm_T = T.sup_abs();
  rep.div_residual = divergence_residual(T, m);
  rep.pairing_residual = pairing_balance(u, T, m, lam).tv_distance;
  const TFormulaResult tf = check_T_formula(u, T, m, lam, tol);
  rep.t_formula_residual = tf.residual;
  rep.jump_trace_residual = tf.jump_trace_residual;
  rep.pass_bound = rep.sup_norm_T <= 1.0 + tol;
  rep.pass_pairing = rep.pairing_residual <= tol;
  rep.pass_divergence = rep.div_residual <= tol;
  rep.pass_t_formula = tf.pass;
  return rep;
}

MidpointVerdict midpoint_uniqueness_test(const RadialProfile& u, const RadialField& T1, const RadialField& T2,
                                         const RadialMeasure& m, const HahnSplit& lam, double tol) {
  check_compatible(u, T1);
  check_compatible(u, T2);
  MidpointVerdict v;
  const RadialField* fields[2] = {&T1, &T2};
  for (int k = 0; k < 2; ++k) {
    const double sup = fields[k]->sup_abs();
    const double div = divergence_residual(*fields[k], m);
    if (sup > 1.0 + tol || div > tol) {
      std::ostringstream os;
      os << "T" << (k + 1) << " fails " << (sup > 1.0 + tol ? "bound" : "divergence") << " (sup=" << sup << ", div=" << div << ")";
      v.refused = true;
      v.reason = os.str();
      return v;
    }
  }
  RadialField mid = T1;
  for (std::size_t i = 0; i < mid.flux.size(); ++i) mid.flux[i] = 0.5 * (T1.flux[i] + T2.flux[i]);
  const PairingBalance b1 = pairing_balance(u, T1, m, lam);
  const PairingBalance b2 = pairing_balance(u, T2, m, lam);
  const PairingBalance bm = pairing_balance(u, mid, m, lam);
  v.slack = bm.conjugate - 0.5 * (b1.conjugate + b2.conjugate);
  v.defect1 = b1.defect();
  v.defect2 = b2.defect();
  v.budget = tol;
  v.consistent = v.slack <= v.budget;
  return v;
}

MaxPrincipleVerdict compare_max_principle(const RadialProfile& u1, const RadialProfile& u2, const RadialMeasure& m1,
                                          const RadialMeasure& m2, double tol) {
  if (u1.grid() != u2.grid()) throw std::invalid_argument("max principle: profiles must share a grid");
  MaxPrincipleVerdict v;
  auto refuse = [&v](const std::string& why) {
    v.refused = true;
    v.failed_hypothesis = why;
    return v;
  };
  for (const RadialProfile* p : {&u1, &u2})
    for (const Jump& j : p->jumps())
      if (j.height() > tol) {
        std::ostringstream os;
        os << "continuity: u" << (p == &u1 ? 1 : 2) << " jumps by " << j.height() << " at r=" << p->grid()[j.node];
        return refuse(os.str());
      }

  const RadialDomain& d = m1.domain;
  std::vector<double> radii;
  for (const Atom& a : m1.atoms) radii.push_back(a.radius);
  for (const Atom& a : m2.atoms) radii.push_back(a.radius);
  auto weight_at = [](const RadialMeasure& m, double r) {
    for (const Atom& a : m.atoms)
      if (a.radius == r) return a.weight;
    return 0.0;
  };
  for (double r : radii)
    if (weight_at(m1, r) > weight_at(m2, r)) {
      std::ostringstream os;
      os << "ordering: mu1 > mu2 on the sphere r=" << r;
      return refuse(os.str());
    }
  std::vector<double> samples = m1.density.breakpoints();
  const std::vector<double> more = m2.density.breakpoints();
  samples.insert(samples.end(), more.begin(), more.end());
  for (int k = 0; k <= 2000; ++k) samples.push_back(d.r_a + (d.r_b - d.r_a) * k / 2000.0);
  for (double r : samples) {
    if (r < d.r_a || r > d.r_b) continue;
    const double h1 = m1.density.value(r, d.n), h2 = m2.density.value(r, d.n);
    if (h1 > h2 + tol * (1.0 + std::abs(h2))) {
      std::ostringstream os;
      os << "ordering: density of mu1 exceeds mu2 at r=" << r;
      return refuse(os.str());
    }
  }
  if (u1.trace_inner() < u2.trace_inner() - tol || u1.trace_outer() < u2.trace_outer() - tol)
    return refuse("trace ordering: Tr(u1) >= Tr(u2) fails on the boundary");

  v.worst_violation = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < u1.nodes(); ++j)
    for (int side : {-1, 1}) {
      const double a = side < 0 ? u1.inner(j) : u1.outer(j);
      const double b = side < 0 ? u2.inner(j) : u2.outer(j);
      if (a - b < v.worst_violation) {
        v.worst_violation = a - b;
        v.worst_radius = u1.grid()[j];
      }
    }
  v.holds = v.worst_violation >= -tol;
  return v;
}

}  // namespace pmcm
