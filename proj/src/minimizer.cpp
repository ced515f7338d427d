#include "pmcm/minimizer.hpp"

#include "pmcm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace pmcm {

std::vector<double> radial_grid(const RadialDomain& d, double h, std::vector<double> breakpoints) {
  d.validate();
  if (!(h > 0.0)) throw ConfigError("grid step must be positive");
  std::vector<double> marks{d.r_a, d.r_b};
  for (double b : breakpoints)
    if (b > d.r_a && b < d.r_b) marks.push_back(b);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::vector<double> grid{marks.front()};
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
    const double a = marks[k], b = marks[k + 1];
    const auto cells = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h - 1e-9)));
    for (std::size_t i = 1; i < cells; ++i) grid.push_back(a + (b - a) * static_cast<double>(i) / cells);
    grid.push_back(b);
  }
  return grid;
}

RadialProblem make_radial_problem(const RadialMeasure& m, double phi_a, double phi_b, double h,
                                  std::vector<double> extra_breakpoints) {
  for (const Atom& a : m.atoms) extra_breakpoints.push_back(a.radius);
  return {m, phi_a, phi_b, radial_grid(m.domain, h, std::move(extra_breakpoints))};
}

AssembledRadial assemble(const RadialProblem& p) {
  const RadialMeasure& m = p.measure;
  m.validate();
  const RadialDomain& d = m.domain;
  const std::vector<double>& g = p.grid;
  if (g.size() < 2 || g.front() != d.r_a || g.back() != d.r_b) throw ConfigError("carrier grid must span [r_a, r_b]");
  for (std::size_t k = 0; k + 1 < g.size(); ++k)
    if (!(g[k] < g[k + 1])) throw ConfigError("carrier grid must be strictly increasing");

  const std::size_t N = g.size();
  std::vector<double> node_mu(N, 0.0);
  std::vector<unsigned char> has_slot(N, 0);
  const double tol = 1e-12 * (d.r_b - d.r_a);
  for (const Atom& a : m.atoms) {
    const SnappedNode s = snap_to_grid(g, a.radius);
    if (s.distance > tol) throw ConfigError("atom at r=" + std::to_string(a.radius) + " is not resolved by the carrier");
    if (std::abs(a.weight) >= 2.0) throw ConfigError("atom weight |mu| >= 2 makes the slot term nonconvex");
    has_slot[s.node] = 1;
    node_mu[s.node] = a.weight;
  }

  AssembledRadial A;
  A.n = d.n;
  A.flat = d.outside_volume();
  A.S_a = d.sphere_area(d.r_a);
  A.S_b = d.sphere_area(d.r_b);
  A.phi_a = p.phi_a;
  A.phi_b = p.phi_b;
  A.inner_unknown.resize(N);
  A.outer_unknown.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    A.inner_unknown[j] = A.node_of.size();
    A.node_of.push_back(j);
    if (has_slot[j]) A.node_of.push_back(j);
    A.outer_unknown[j] = A.node_of.size() - 1;
  }
  A.lin.assign(A.unknowns(), 0.0);
  const double area_unit = unit_sphere_area(d.n);
  for (std::size_t e = 0; e + 1 < A.unknowns(); ++e) {
    const std::size_t j = A.node_of[e];
    if (A.node_of[e + 1] == j) {
      const double S = d.sphere_area(g[j]);
      const double mu = node_mu[j];
      A.is_slot.push_back(1);
      A.weight.push_back(S * (1.0 - 0.5 * std::abs(mu)));
      A.width.push_back(1.0);
      A.bound.push_back(S * (1.0 - 0.5 * std::abs(mu)));
      A.slot_mu.push_back(mu);
      A.lin[e] += 0.5 * S * mu;
      A.lin[e + 1] += 0.5 * S * mu;
    } else {
      const double dr = g[j + 1] - g[j];
      const double mid = 0.5 * (g[j] + g[j + 1]);
      const double b = area_unit * ipow(mid, d.n - 1);
      A.is_slot.push_back(0);
      A.weight.push_back(b * dr);
      A.width.push_back(dr);
      A.bound.push_back(b);
      A.slot_mu.push_back(0.0);
      if (!m.density.empty()) {
        const double lo = g[j], hi = g[j + 1];
        A.lin[e] += area_unit * m.density.integrate([&](double r) { return (hi - r) / dr; }, d.n, lo, hi);
        A.lin[e + 1] += area_unit * m.density.integrate([&](double r) { return (r - lo) / dr; }, d.n, lo, hi);
      }
    }
  }
  return A;
}

double energy(const AssembledRadial& a, const std::vector<double>& v) {
  double e = a.flat;
  for (std::size_t k = 0; k < a.edges(); ++k) {
    const double dv = v[k + 1] - v[k];
    if (a.is_slot[k])
      e += a.weight[k] * std::abs(dv);
    else
      e += a.weight[k] * std::hypot(1.0, dv / a.width[k]);
  }
  for (std::size_t p = 0; p < v.size(); ++p) e += a.lin[p] * v[p];
  e += a.S_a * std::abs(v.front() - a.phi_a) + a.S_b * std::abs(v.back() - a.phi_b);
  return e;
}

std::vector<double> unknowns_from_profile(const AssembledRadial& a, const RadialProfile& u) {
  if (u.nodes() != a.inner_unknown.size()) throw std::invalid_argument("profile is not conformal to the carrier");
  std::vector<double> v(a.unknowns());
  for (std::size_t j = 0; j < u.nodes(); ++j) {
    if (u.jump_at(j) && a.inner_unknown[j] == a.outer_unknown[j])
      throw std::invalid_argument("profile jumps at a node without a slot");
    v[a.inner_unknown[j]] = u.inner(j);
    v[a.outer_unknown[j]] = u.outer(j);
  }
  return v;
}

double energy(const RadialProblem& p, const RadialProfile& u) {
  const AssembledRadial a = assemble(p);
  return energy(a, unknowns_from_profile(a, u));
}

DualCertificate certify(const AssembledRadial& a) {
  const std::size_t E = a.edges();
  std::vector<double> cum(E);
  double run = 0.0;
  for (std::size_t e = 0; e < E; ++e) {
    run += a.lin[e];
    cum[e] = run;
  }
  const double total = run + a.lin.back();
  double lo = std::max(-a.S_a, -a.S_b - total), hi = std::min(a.S_a, a.S_b - total);
  for (std::size_t e = 0; e < E; ++e) {
    lo = std::max(lo, -a.bound[e] - cum[e]);
    hi = std::min(hi, a.bound[e] - cum[e]);
  }
  DualCertificate out;
  if (lo > hi) return out;
  out.feasible = true;

  auto ratio = [&](double F, std::size_t e) { return std::clamp((F + cum[e]) / a.bound[e], -1.0, 1.0); };
  auto slope = [&](double F) {
    double s = a.phi_b - a.phi_a;
    for (std::size_t e = 0; e < E; ++e) {
      if (a.is_slot[e]) continue;
      const double w = ratio(F, e);
      const double q = std::sqrt((1.0 - w) * (1.0 + w));
      if (q == 0.0) return w > 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
      s -= a.width[e] * w / q;
    }
    return s;
  };
  auto value = [&](double F) {
    double v = a.flat - F * a.phi_a + (F + total) * a.phi_b;
    for (std::size_t e = 0; e < E; ++e) {
      if (a.is_slot[e]) continue;
      const double w = ratio(F, e);
      v += a.weight[e] * std::sqrt((1.0 - w) * (1.0 + w));
    }
    return v;
  };

  double F;
  if (slope(lo) <= 0.0) {
    F = lo;
  } else if (slope(hi) >= 0.0) {
    F = hi;
  } else {
    double x = lo, y = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (x + y);
      if (mid == x || mid == y) break;
      if (slope(mid) > 0.0) x = mid; else y = mid;
    }
    F = value(x) >= value(y) ? x : y;
  }
  out.anchor = F;
  out.value = value(F);
  out.edge_flux.resize(E);
  for (std::size_t e = 0; e < E; ++e) out.edge_flux[e] = std::clamp(F + cum[e], -a.bound[e], a.bound[e]);
  return out;
}

double SaddleState::max_dual_norm() const {
  double m = std::max(std::abs(za), std::abs(zb));
  for (std::size_t k = 0; k < w.size(); ++k) m = std::max(m, w0[k] * w0[k] + w[k] * w[k]);
  for (double x : z) m = std::max(m, std::abs(x));
  return m;
}

nlohmann::json ConvergenceReport::to_json() const {
  return {{"energy", energy},
          {"dual", dual},
          {"gap", gap},
          {"iters", iters},
          {"L_hat", L_hat},
          {"converged", converged},
          {"status", status},
          {"seconds", seconds},
          {"grid", {{"h", h}, {"cells", cells}}}};
}

namespace {

// K v: cell rows W dv/dr, slot rows S c dv, then S_a v_0 and S_b v_M.
void apply_K(const AssembledRadial& a, const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t E = a.edges();
  for (std::size_t e = 0; e < E; ++e) out[e] = a.weight[e] * (v[e + 1] - v[e]) / a.width[e];
  out[E] = a.S_a * v.front();
  out[E + 1] = a.S_b * v.back();
}

void apply_KT(const AssembledRadial& a, const std::vector<double>& y, std::vector<double>& out) {
  const std::size_t E = a.edges();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t e = 0; e < E; ++e) {
    const double c = a.weight[e] * y[e] / a.width[e];
    out[e + 1] += c;
    out[e] -= c;
  }
  out.front() += a.S_a * y[E];
  out.back() += a.S_b * y[E + 1];
}

double operator_norm(const AssembledRadial& a, int iterations) {
  const std::size_t M = a.unknowns();
  std::vector<double> v(M), y(a.edges() + 2), t(M);
  for (std::size_t p = 0; p < M; ++p) v[p] = std::sin(0.37 * static_cast<double>(p) + 0.1) + 0.5;
  double lam = 0.0;
  for (int it = 0; it < iterations; ++it) {
    apply_K(a, v, y);
    apply_KT(a, y, t);
    double nrm = 0.0;
    for (double x : t) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) break;
    double vn = 0.0;
    for (double x : v) vn += x * x;
    lam = nrm / std::sqrt(vn);
    for (std::size_t p = 0; p < M; ++p) v[p] = t[p] / nrm;
  }
  return std::sqrt(lam);
}

RadialProfile profile_from_unknowns(const RadialProblem& p, const AssembledRadial& a, const std::vector<double>& v) {
  std::vector<double> values(p.grid.size());
  std::vector<Jump> jumps;
  for (std::size_t j = 0; j < p.grid.size(); ++j) {
    values[j] = v[a.inner_unknown[j]];
    const double out = v[a.outer_unknown[j]];
    if (out != values[j]) jumps.push_back(make_jump(p.grid, p.grid[j], values[j], out));
  }
  return RadialProfile(p.measure.domain, p.grid, std::move(values), std::move(jumps));
}

}  // namespace

RadialMinimizer minimize(const RadialProblem& p, const MinimizeOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const AssembledRadial a = assemble(p);
  ConvergenceReport rep;
  rep.L_hat = nonextremality(p.measure, 1025).L_hat;
  rep.cells = p.grid.size() - 1;
  for (std::size_t k = 0; k + 1 < p.grid.size(); ++k) rep.h = std::max(rep.h, p.grid[k + 1] - p.grid[k]);
  if (rep.L_hat >= 1.0)
    throw Refused("non-coercive input: L_hat = " + std::to_string(rep.L_hat) + " >= 1");

  const std::size_t M = a.unknowns(), E = a.edges();
  SaddleState s;
  s.v.resize(M);
  for (std::size_t q = 0; q < M; ++q) {
    const double r = p.grid[a.node_of[q]];
    const double t = (r - p.grid.front()) / (p.grid.back() - p.grid.front());
    s.v[q] = (1.0 - t) * p.phi_a + t * p.phi_b;
  }
  s.w0.assign(E, 0.0);
  s.w.assign(E, 0.0);
  s.z.assign(E, 0.0);
  const double L = 1.01 * operator_norm(a, opt.power_iterations);
  s.sigma = s.tau = L > 0.0 ? 1.0 / L : 1.0;

  std::vector<double> v_bar = s.v, y(E + 2), kt(M);
  const double e0 = energy(a, s.v);
  const double blowup = 10.0 * std::max(std::abs(e0), a.flat + a.S_a + a.S_b);
  DualCertificate cert;
  rep.status = "max_iter";
  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    apply_K(a, v_bar, y);
    for (std::size_t e = 0; e < E; ++e) {
      if (a.is_slot[e]) {
        s.z[e] = std::clamp(s.z[e] + s.sigma * y[e], -1.0, 1.0);
        continue;
      }
      const double b0 = s.w0[e] + s.sigma * a.weight[e];
      const double b1 = s.w[e] + s.sigma * y[e];
      const double nr = std::max(1.0, std::hypot(b0, b1));
      s.w0[e] = b0 / nr;
      s.w[e] = b1 / nr;
    }
    s.za = std::clamp(s.za + s.sigma * (y[E] - a.S_a * a.phi_a), -1.0, 1.0);
    s.zb = std::clamp(s.zb + s.sigma * (y[E + 1] - a.S_b * a.phi_b), -1.0, 1.0);

    for (std::size_t e = 0; e < E; ++e) y[e] = a.is_slot[e] ? s.z[e] : s.w[e];
    y[E] = s.za;
    y[E + 1] = s.zb;
    apply_KT(a, y, kt);
    for (std::size_t q = 0; q < M; ++q) {
      const double old = s.v[q];
      s.v[q] = old - s.tau * (kt[q] + a.lin[q]);
      v_bar[q] = 2.0 * s.v[q] - old;
    }

    if ((it + 1) % opt.check_every == 0 || it + 1 == opt.max_iter) {
      rep.energy = energy(a, s.v);
      if (!std::isfinite(rep.energy) || std::abs(rep.energy) > blowup) {
        rep.status = "diverged";
        ++it;
        break;
      }
      cert = certify(a);
      if (!cert.feasible) {
        rep.status = "dual infeasible";
        ++it;
        break;
      }
      rep.dual = cert.value;
      rep.gap = rep.energy - rep.dual;
      if (rep.gap <= opt.tol_gap) {
        rep.converged = true;
        rep.status = "converged";
        ++it;
        break;
      }
    }
  }
  rep.iters = it;
  if (!cert.feasible) cert = certify(a);
  rep.energy = energy(a, s.v);
  rep.dual = cert.feasible ? cert.value : -std::numeric_limits<double>::infinity();
  rep.gap = rep.energy - rep.dual;
  s.iters = it;
  s.gap = rep.gap;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RadialField T{p.measure.domain, p.grid, std::vector<double>(p.grid.size() - 1, 0.0)};
  if (cert.feasible) {
    const double area_unit = unit_sphere_area(a.n);
    for (std::size_t e = 0; e < E; ++e)
      if (!a.is_slot[e]) T.flux[a.node_of[e]] = cert.edge_flux[e] / area_unit;
  }
  return {profile_from_unknowns(p, a, s.v), std::move(T), rep, std::move(s)};
}

}  // namespace pmcm
