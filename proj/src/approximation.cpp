#include "pmcm/approximation.hpp"

#include "pmcm/errors.hpp"
#include "pmcm/mollifier.hpp"
#include "pmcm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace pmcm {

RadialMeasure mollify_measure(const RadialMeasure& m, double delta) {
  m.validate();
  if (!(delta > 0.0)) throw ConfigError("mollify_measure: delta must be positive");
  const RadialDomain& d = m.domain;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> radii;
  for (const Atom& a : m.atoms) radii.push_back(a.radius);
  std::sort(radii.begin(), radii.end());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    gap = std::min({gap, radii[i] - d.r_a, d.r_b - radii[i]});
    if (i > 0) gap = std::min(gap, radii[i] - radii[i - 1]);
  }
  if (!(delta < gap)) {
    std::ostringstream os;
    os << "mollify_measure: delta=" << delta << " is not below the minimal atom gap " << gap;
    throw ConfigError(os.str());
  }
  RadialMeasure out;
  out.domain = d;
  out.density = m.density;
  for (const Atom& a : m.atoms) out.density.bumps.push_back({a.radius, delta, a.weight * ipow(a.radius, d.n - 1)});
  return out;
}

double l1_distance(const RadialProfile& p, const RadialProfile& q) {
  if (p.grid() != q.grid()) throw std::invalid_argument("l1_distance: profiles must share a grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const double a = p.outer(i) - q.outer(i);
    const double b = p.values()[i + 1] - q.values()[i + 1];
    // mean of |linear| over the cell
    double mean;
    if (a * b >= 0.0) mean = 0.5 * std::abs(a + b);
    else mean = 0.5 * (a * a + b * b) / (std::abs(a) + std::abs(b));
    sum += mean * p.cell_volume(i);
  }
  return sum;
}

RadialProfile refine(const RadialProfile& p, const std::vector<double>& grid) {
  const auto& g = p.grid();
  std::vector<double> values(grid.size());
  std::vector<Jump> jumps;
  std::size_t next = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = p.value(grid[k], -1);
    if (next < g.size() && grid[k] == g[next]) {
      if (const Jump* j = p.jump_at(next)) {
        Jump copy = *j;
        copy.node = k;
        jumps.push_back(copy);
      }
      ++next;
    }
  }
  if (next != g.size()) throw std::invalid_argument("refine: grid must contain every node of the profile");
  return RadialProfile(p.domain(), grid, std::move(values), std::move(jumps));
}

// ---------------------------------------------------------------------------

std::string GammaTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "delta,energy,gap,l1_dist\n";
  for (const GammaRow& r : rows) os << r.delta << ',' << r.energy << ',' << r.gap << ',' << r.l1_dist << '\n';
  return os.str();
}

nlohmann::json GammaTable::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const GammaRow& r : rows)
    rs.push_back({{"delta", r.delta},
                  {"energy", r.energy},
                  {"gap", r.gap},
                  {"l1_dist", r.l1_dist},
                  {"L_hat", r.L_hat},
                  {"solver_gap", r.solver_gap},
                  {"iters", r.iters}});
  return {{"limit_energy", limit_energy},
          {"limit_solver_gap", limit_solver_gap},
          {"monotone", monotone},
          {"final_gap", final_gap()},
          {"rows", rs}};
}

GammaTable gamma_experiment(const GammaConfig& cfg) {
  if (cfg.deltas.empty()) throw ConfigError("gamma_experiment: no deltas");
  for (std::size_t k = 1; k < cfg.deltas.size(); ++k)
    if (!(cfg.deltas[k] < cfg.deltas[k - 1])) throw ConfigError("gamma_experiment: deltas must be strictly decreasing");

  std::vector<RadialMeasure> mollified;
  std::vector<double> L(cfg.deltas.size());
  for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
    mollified.push_back(mollify_measure(cfg.measure, cfg.deltas[k]));
    L[k] = nonextremality(mollified.back(), cfg.resolution).L_hat;
    if (!(L[k] < 1.0)) {
      std::ostringstream os;
      os << "gamma_experiment: mollified measure at delta=" << cfg.deltas[k] << " is extremal (L_hat=" << L[k] << ")";
      throw Refused(os.str());
    }
  }

  // One grid for every run so that minimizers compare node by node.
  std::vector<double> breaks;
  for (const Atom& a : cfg.measure.atoms)
    for (double dl : cfg.deltas) {
      breaks.push_back(a.radius - dl);
      breaks.push_back(a.radius + dl);
    }
  const RadialProblem limit = make_radial_problem(cfg.measure, cfg.phi_a, cfg.phi_b, cfg.h, breaks);

  const std::size_t runs = cfg.deltas.size() + 1;
  std::vector<RadialMinimizer> results(runs);
  std::vector<std::exception_ptr> errors(runs);
  const int jobs = std::max(1, cfg.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (std::size_t k = 0; k < runs; ++k) {
    try {
      RadialProblem p = limit;
      if (k < cfg.deltas.size()) p.measure = mollified[k];
      results[k] = minimize(p, cfg.options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  GammaTable t;
  const RadialMinimizer& lim = results.back();
  t.limit_energy = lim.report.energy;
  t.limit_solver_gap = lim.report.gap;
  for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
    const RadialMinimizer& r = results[k];
    GammaRow row;
    row.delta = cfg.deltas[k];
    row.energy = r.report.energy;
    row.gap = r.report.energy - t.limit_energy;
    row.l1_dist = l1_distance(r.u, lim.u);
    row.L_hat = L[k];
    row.solver_gap = r.report.gap;
    row.iters = r.report.iters;
    t.rows.push_back(row);
  }
  t.monotone = true;
  for (std::size_t k = 1; k < t.rows.size(); ++k)
    if (std::abs(t.rows[k].gap) > std::abs(t.rows[k - 1].gap) + 2.0 * cfg.options.tol_gap) t.monotone = false;
  return t;
}

// ---------------------------------------------------------------------------

namespace {

// Smooth step: 0 for s <= 0.1, 1 for s >= 0.9.
double smooth_step(double s) { return Mollifier::standard().cumulative((s - 0.5) / 0.4); }

double unweighted_variation(const RadialProfile& p) {
  double v = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) v += std::abs(p.values()[i + 1] - p.outer(i));
  for (const Jump& j : p.jumps()) v += j.height();
  return v;
}

double unit_bump(double s) {
  const double q = 1.0 - s * s;
  return q <= 0.0 ? 0.0 : std::exp(1.0 - 1.0 / q);
}

}  // namespace

SmoothedProfile::SmoothedProfile(RadialProfile source, double eps, std::vector<double> lam_at_jumps)
    : src_(std::move(source)), eps_(eps) {
  if (!(eps > 0.0)) throw ConfigError("smoothing: eps must be positive");
  const RadialDomain& d = src_.domain();
  D_ = 0.25 * (d.r_b - d.r_a);
  var_ = unweighted_variation(src_);
  sup_ = src_.sup_abs();
  w_max_ = d.sphere_area(d.r_b);
  volume_ = d.shell_volume(d.r_a, d.r_b);
  slope_max_ = Mollifier::standard().density(0.0) / 0.4;

  const auto& jumps = src_.jumps();
  if (!lam_at_jumps.empty() && lam_at_jumps.size() != jumps.size())
    throw ConfigError("lambda_smooth_profile: one lambda per jump is required");
  for (std::size_t i = 0; i < lam_at_jumps.size(); ++i) {
    const double lam = lam_at_jumps[i];
    if (!(lam >= 0.0 && lam <= 1.0)) throw ConfigError("lambda_smooth_profile: lambda must lie in [0, 1]");
    const double r = src_.grid()[jumps[i].node];
    double reach = std::min(r - d.r_a, d.r_b - r);
    for (std::size_t j = 0; j < jumps.size(); ++j)
      if (j != i) reach = std::min(reach, std::abs(src_.grid()[jumps[j].node] - r));
    tau_.push_back(lam == 0.5 ? 0.0 : Mollifier::standard().inverse_cumulative(lam));
    shift_radius_.push_back(reach / 3.0);
  }
}

double SmoothedProfile::width(int k) const {
  const RadialDomain& d = src_.domain();
  const double dk = strip_distance(k);
  const double budget = eps_ * std::ldexp(1.0, -k);
  const double zeta_slope = 2.0 * slope_max_ / dk;
  const double zeta_curv = 12.0 * slope_max_ / dk;
  double delta = 0.02 * dk;
  delta = std::min(delta, budget / (w_max_ * (var_ + 4.0 * sup_) + 1e-300));
  delta = std::min(delta, budget / (w_max_ * (var_ * zeta_slope + sup_ * zeta_curv) + 1e-300));
  delta = std::min(delta, budget / (zeta_slope * std::max(1.0, volume_)));
  if (d.n > 1) {
    // Convolution moves mass outward by at most delta; the sphere weight grows
    // by (1 + delta / r_a)^{n-1}.
    const double mass = w_max_ * (var_ + (d.r_b - d.r_a));
    if (mass > 0.0) delta = std::min(delta, d.r_a * std::expm1(std::log1p(budget / mass) / (d.n - 1)));
  }
  return delta;
}

double SmoothedProfile::dist(double r) const {
  const RadialDomain& d = src_.domain();
  return std::min(r - d.r_a, d.r_b - r);
}

double SmoothedProfile::cutoff(int k, double t) const {
  if (k <= 0) return 0.0;
  const double lo = strip_distance(k + 1);
  return smooth_step((t - lo) / lo);
}

double SmoothedProfile::weight(int k, double t) const { return cutoff(k, t) - cutoff(k - 1, t); }

double SmoothedProfile::shift_field(double r) const {
  double s = 0.0;
  const auto& jumps = src_.jumps();
  for (std::size_t i = 0; i < tau_.size(); ++i) {
    if (tau_[i] == 0.0) continue;
    const double c = src_.grid()[jumps[i].node];
    s += tau_[i] * jumps[i].orientation * unit_bump((r - c) / shift_radius_[i]);
  }
  return s;
}

double SmoothedProfile::term(int k, double x, double shift) const {
  const double delta = width(k);
  const RadialDomain& d = src_.domain();
  if (delta < 1e-10 * d.r_b) {
    // Below this width the convolution is the identity to well within its
    // error budget; at a jump node it sees the shifted precise representative.
    const auto& g = src_.grid();
    const auto it = std::lower_bound(g.begin(), g.end(), x);
    double v = src_.value(x);
    if (it != g.end() && *it == x) {
      const std::size_t node = static_cast<std::size_t>(it - g.begin());
      const double p = Mollifier::standard().cumulative(shift);
      v = (1.0 - p) * src_.inner(node) + p * src_.outer(node);
    }
    return v * weight(k, dist(x));
  }
  const double c = x + shift * delta;
  const double lo = std::max(d.r_a, c - delta), hi = std::min(d.r_b, c + delta);
  if (!(hi > lo)) return 0.0;
  const auto& g = src_.grid();
  auto first = std::upper_bound(g.begin(), g.end(), lo);
  auto last = std::lower_bound(g.begin(), g.end(), hi);
  std::vector<double> breaks(first, last);
  const int per = std::max(2, 16 / static_cast<int>(breaks.size() + 1));
  const Mollifier& rho = Mollifier::standard();
  auto f = [&](double y) { return rho.kernel(c - y, delta) * src_.value(y) * weight(k, dist(y)); };
  return quad::split_gauss8(f, lo, hi, std::move(breaks), per);
}

double SmoothedProfile::value(double r) const {
  const RadialDomain& d = src_.domain();
  if (r <= d.r_a) return src_.trace_inner();
  if (r >= d.r_b) return src_.trace_outer();
  const double t = dist(r);
  const double shift = shift_field(r);
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double dk = strip_distance(k);
    if (k > 1 && t >= 2.0 * dk) break;  // strip k and later ones lie closer to the boundary
    if (t <= 0.5 * dk) continue;
    sum += term(k, r, shift);
  }
  return sum;
}

std::vector<double> SmoothedProfile::refined_grid() const {
  const auto& g = src_.grid();
  const double span = g.back() - g.front();
  const double step = std::max(span / 20000.0, 0.25 * width(1));
  std::vector<double> out{g.front()};
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double w = g[i + 1] - g[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil(w / step)));
    for (int p = 1; p < pieces; ++p) out.push_back(g[i] + w * p / pieces);
    out.push_back(g[i + 1]);
  }
  return out;
}

RadialProfile SmoothedProfile::sample(const std::vector<double>& grid) const {
  std::vector<double> values(grid.size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = value(grid[k]);
  return RadialProfile(src_.domain(), grid, std::move(values));
}

SmoothedProfile smooth_profile(const RadialProfile& p, double eps) { return SmoothedProfile(p, eps); }

SmoothedProfile lambda_smooth_profile(const RadialProfile& p, const std::vector<double>& lam_at_jumps, double eps) {
  return SmoothedProfile(p, eps, lam_at_jumps);
}

// ---------------------------------------------------------------------------

RadialProfile one_sided_truncate(const RadialProfile& p, RadialSubinterval U, double M) {
  const RadialDomain& d = p.domain();
  if (!(d.r_a < U.lo && U.lo < U.hi && U.hi < d.r_b))
    throw ConfigError("one_sided_truncate: U must be a subinterval of (r_a, r_b)");

  // Grid with the ends of U and every crossing of the level M inside U.
  std::vector<double> grid = p.grid();
  grid.push_back(U.lo);
  grid.push_back(U.hi);
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const double a = p.outer(i) - M, b = p.values()[i + 1] - M;
    if (a * b < 0.0) {
      const double r = p.grid()[i] + p.cell_width(i) * a / (a - b);
      if (r > U.lo && r < U.hi) grid.push_back(r);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> values(grid.size());
  std::vector<Jump> jumps;
  auto in_U = [&](double r) { return r > U.lo && r < U.hi; };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid[k];
    double in = p.value(r, -1), out = p.value(r, 1);
    // inner side lies in U when r is in (lo, hi]; outer side when r is in [lo, hi)
    if (in_U(r) || r == U.hi) in = std::min(in, M);
    if (in_U(r) || r == U.lo) out = std::min(out, M);
    values[k] = in;
    if (in != out) jumps.push_back(make_jump(grid, r, in, out));
  }
  return RadialProfile(d, std::move(grid), std::move(values), std::move(jumps));
}

}  // namespace pmcm
