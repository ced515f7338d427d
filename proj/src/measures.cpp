#include "pmcm/measures.hpp"

#include "pmcm/errors.hpp"
#include "pmcm/kernels.hpp"
#include "pmcm/mollifier.hpp"
#include "pmcm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmcm {

double DensityPiece::operator()(double r) const {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * r + *it;
  return v;
}

double RadialDensity::value(double r, int n) const {
  double v = 0.0;
  for (const DensityPiece& p : pieces)
    if (r >= p.lo && r < p.hi) v += p(r);
  if (!bumps.empty()) {
    const Mollifier& rho = Mollifier::standard();
    double b = 0.0;
    for (const DensityBump& q : bumps) b += q.flux * rho.kernel(r - q.center, q.width);
    v += b / ipow(r, n - 1);
  }
  return v;
}

std::vector<double> RadialDensity::breakpoints() const {
  std::vector<double> out;
  for (const DensityPiece& p : pieces) {
    out.push_back(p.lo);
    out.push_back(p.hi);
  }
  for (const DensityBump& q : bumps) {
    out.push_back(q.center - q.width);
    out.push_back(q.center);
    out.push_back(q.center + q.width);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double RadialDensity::flux(int n, double a, double b) const {
  if (b <= a) return 0.0;
  double sum = 0.0;
  for (const DensityPiece& p : pieces) {
    const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
    if (hi > lo) sum += quad::gauss8([&](double s) { return p(s) * ipow(s, n - 1); }, lo, hi);
  }
  const Mollifier& rho = Mollifier::standard();
  for (const DensityBump& q : bumps)
    sum += q.flux * (rho.cumulative((b - q.center) / q.width) - rho.cumulative((a - q.center) / q.width));
  return sum;
}

double RadialDensity::integrate(const std::function<double(double)>& f, int n, double a, double b) const {
  if (b <= a || empty()) return 0.0;
  return quad::split_gauss8([&](double s) { return f(s) * value(s, n) * ipow(s, n - 1); }, a, b, breakpoints(), 32);
}

void RadialMeasure::validate() const {
  domain.validate();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (!std::isfinite(a.weight) || !std::isfinite(a.radius)) throw ConfigError("measure: non-finite atom");
    if (!(a.radius > domain.r_a && a.radius < domain.r_b))
      throw ConfigError("measure: atom radius must lie strictly inside (r_a, r_b)");
    if (i > 0 && !(atoms[i - 1].radius < a.radius)) throw ConfigError("measure: atom radii must increase strictly");
  }
  for (std::size_t k = 0; k < density.pieces.size(); ++k) {
    const DensityPiece& p = density.pieces[k];
    if (!(p.lo < p.hi) || p.lo < domain.r_a || p.hi > domain.r_b)
      throw ConfigError("measure: density piece outside the annulus");
    if (k > 0 && density.pieces[k - 1].hi > p.lo) throw ConfigError("measure: density pieces overlap");
    for (double c : p.coeffs)
      if (!std::isfinite(c)) throw ConfigError("measure: non-finite density coefficient");
  }
  for (const DensityBump& q : density.bumps) {
    if (!(q.width > 0.0)) throw ConfigError("measure: bump width must be positive");
    if (q.center - q.width < domain.r_a || q.center + q.width > domain.r_b)
      throw ConfigError("measure: bump support leaves the annulus");
  }
}

bool RadialMeasure::is_zero() const {
  for (const Atom& a : atoms)
    if (a.weight != 0.0) return false;
  for (const DensityPiece& p : density.pieces)
    for (double c : p.coeffs)
      if (c != 0.0) return false;
  for (const DensityBump& q : density.bumps)
    if (q.flux != 0.0) return false;
  return true;
}

double RadialMeasure::total_variation() const {
  const int n = domain.n;
  double sum = 0.0;
  for (const Atom& a : atoms) sum += std::abs(a.weight) * ipow(a.radius, n - 1);
  if (!density.empty())
    sum += quad::split_gauss8([&](double s) { return std::abs(density.value(s, n)) * ipow(s, n - 1); }, domain.r_a,
                              domain.r_b, density.breakpoints(), 64);
  return unit_sphere_area(n) * sum;
}

double RadialMeasure::cumulative(double r, bool include_at) const {
  const int n = domain.n;
  double sum = 0.0;
  for (const Atom& a : atoms)
    if (a.radius < r || (include_at && a.radius == r)) sum += a.weight * ipow(a.radius, n - 1);
  sum += density.flux(n, domain.r_a, std::min(r, domain.r_b));
  return unit_sphere_area(n) * sum;
}

int HahnSplit::density_lambda(double r) const {
  for (const auto& [lo, hi] : density_negative)
    if (r > lo && r < hi) return 1;
  return 0;
}

HahnSplit hahn_lambda(const RadialMeasure& m) {
  HahnSplit out;
  for (const Atom& a : m.atoms) out.atom_negative.push_back(a.weight < 0.0 ? 1 : 0);
  if (m.density.empty()) return out;
  const int n = m.domain.n;
  auto h = [&](double r) { return m.density.value(r, n); };
  std::vector<double> breaks = m.density.breakpoints();
  breaks.push_back(m.domain.r_a);
  breaks.push_back(m.domain.r_b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  // Cut points: segment ends plus refined sign changes inside segments.
  std::vector<double> cuts;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = std::max(breaks[k], m.domain.r_a), b = std::min(breaks[k + 1], m.domain.r_b);
    if (!(b > a)) continue;
    cuts.push_back(a);
    const int samples = 64;
    const double step = (b - a) / samples;
    for (int s = 0; s < samples; ++s) {
      double lo = a + s * step, hi = (s + 1 == samples) ? b : a + (s + 1) * step;
      cuts.push_back(lo);
      const double flo = h(lo + 1e-12 * step), fhi = h(hi - 1e-12 * step);
      if ((flo < 0.0) == (fhi < 0.0)) continue;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((h(mid) < 0.0) == (flo < 0.0)) lo = mid; else hi = mid;
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (h(0.5 * (lo + hi)) >= 0.0) continue;
    if (!out.density_negative.empty() && out.density_negative.back().second == lo)
      out.density_negative.back().second = hi;
    else
      out.density_negative.emplace_back(lo, hi);
  }
  return out;
}

namespace {

void check_set(const RadialMeasure& m, const RadialSet& set) {
  for (std::size_t k = 0; k < set.size(); ++k) {
    const RadialInterval& iv = set[k];
    if (!(iv.lo < iv.hi) || iv.lo < m.domain.r_a || iv.hi > m.domain.r_b)
      throw std::invalid_argument("radial set must lie inside the annulus");
    if (k > 0 && set[k - 1].hi > iv.lo) throw std::invalid_argument("radial set intervals must be disjoint and sorted");
  }
}

double density_flux_excluding(const RadialMeasure& m, double a, double b,
                              const std::vector<std::pair<double, double>>& holes, bool inside_holes) {
  double in = 0.0;
  for (const auto& [lo, hi] : holes) {
    const double x = std::max(a, lo), y = std::min(b, hi);
    if (y > x) in += m.density.flux(m.domain.n, x, y);
  }
  return inside_holes ? in : m.density.flux(m.domain.n, a, b) - in;
}

}  // namespace

double measure_of(const RadialMeasure& m, const RadialSet& set) {
  check_set(m, set);
  const int n = m.domain.n;
  double sum = 0.0;
  for (const RadialInterval& iv : set) {
    for (const Atom& a : m.atoms)
      if (a.radius > iv.lo && a.radius < iv.hi) sum += a.weight * ipow(a.radius, n - 1);
    sum += m.density.flux(n, iv.lo, iv.hi);
  }
  return unit_sphere_area(n) * sum;
}

std::pair<double, double> measure_of_split(const RadialMeasure& m, const HahnSplit& lam, const RadialSet& set) {
  check_set(m, set);
  const int n = m.domain.n;
  double pos = 0.0, neg = 0.0;
  for (const RadialInterval& iv : set) {
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      const Atom& a = m.atoms[i];
      if (!(a.radius > iv.lo && a.radius < iv.hi)) continue;
      (lam.atom_lambda(i) ? neg : pos) += a.weight * ipow(a.radius, n - 1);
    }
    pos += density_flux_excluding(m, iv.lo, iv.hi, lam.density_negative, false);
    neg += density_flux_excluding(m, iv.lo, iv.hi, lam.density_negative, true);
  }
  const double c = unit_sphere_area(n);
  return {c * pos, c * neg};
}

NonExtremalityReport nonextremality(const RadialMeasure& m, int resolution, bool parallel) {
  m.validate();
  if (resolution < static_cast<int>(m.atoms.size()) + 2)
    throw ConfigError("nonextremality: resolution must be >= number of atoms + 2");
  const RadialDomain& d = m.domain;
  const int n = d.n;
  int levels = 1;
  while ((1 << levels) + 1 < resolution) ++levels;
  const double len = d.r_b - d.r_a;

  struct Candidate {
    double x;
    bool included;
  };
  std::vector<Candidate> cand;
  const int finest = 1 << levels;
  for (int k = 0; k <= finest; ++k) cand.push_back({k == finest ? d.r_b : d.r_a + len * k / finest, false});
  for (const Atom& a : m.atoms) {
    cand.push_back({a.radius, false});
    cand.push_back({a.radius, true});
    for (int l = 1; l <= levels; ++l) {
      const double step = len / (1 << l);
      for (double x : {a.radius - step, a.radius + step})
        if (x >= d.r_a && x <= d.r_b) cand.push_back({x, false});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return a.x < b.x || (a.x == b.x && a.included < b.included);
  });
  cand.erase(std::unique(cand.begin(), cand.end(),
                         [](const Candidate& a, const Candidate& b) { return a.x == b.x && a.included == b.included; }),
             cand.end());

  // Inner endpoint s: mass of (r_a, s) excluding (or including) an atom at s
  // is subtracted; outer endpoint t: mass up to t with the flag as given.
  const std::size_t K = cand.size();
  kernels::PairScanInput in;
  in.x.resize(K);
  in.inner_mass.resize(K);
  in.outer_mass.resize(K);
  in.perimeter.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    in.x[k] = cand[k].x;
    in.inner_mass[k] = m.cumulative(cand[k].x, !cand[k].included);
    in.outer_mass[k] = m.cumulative(cand[k].x, cand[k].included);
    in.perimeter[k] = d.sphere_area(cand[k].x);
  }
  const kernels::PairScanResult best = parallel ? kernels::max_pair_ratio(in) : kernels::max_pair_ratio_serial(in);

  NonExtremalityReport rep;
  rep.candidates = K;
  rep.L_hat = best.value;
  if (best.i < K && best.j < K) {
    rep.s = cand[best.i].x;
    rep.t = cand[best.j].x;
    rep.s_included = cand[best.i].included;
    rep.t_included = cand[best.j].included;
  }
  if (m.atoms.size() == 1 && m.density.empty()) {
    const Atom& a = m.atoms[0];
    const double ra = ipow(d.r_a, n - 1), r2 = ipow(a.radius, n - 1);
    rep.analytic = std::abs(a.weight) * r2 / (ra + r2);
  }
  return rep;
}

namespace {
double sin_power_integral(int k, double alpha) {
  if (k == 0) return alpha;
  if (k == 1) return 1.0 - std::cos(alpha);
  return -std::pow(std::sin(alpha), k - 1) * std::cos(alpha) / k + (k - 1.0) / k * sin_power_integral(k - 2, alpha);
}
}  // namespace

double spherical_cap_area(int n, double R, double rho, double r) {
  const double full = unit_sphere_area(n) * ipow(R, n - 1);
  if (rho == 0.0) return r > R ? full : 0.0;
  const double c = (rho * rho + R * R - r * r) / (2.0 * rho * R);
  if (c >= 1.0) return 0.0;
  if (c <= -1.0) return full;
  return unit_sphere_area(n - 1) * ipow(R, n - 1) * sin_power_integral(n - 2, std::acos(c));
}

double ball_measure(const RadialMeasure& m, double rho, double r) {
  const int n = m.domain.n;
  double sum = 0.0;
  for (const Atom& a : m.atoms) sum += a.weight * spherical_cap_area(n, a.radius, rho, r);
  if (!m.density.empty()) {
    const double lo = std::max(m.domain.r_a, rho - r), hi = std::min(m.domain.r_b, rho + r);
    sum += m.density.integrate(
        [&](double s) { return spherical_cap_area(n, s, rho, r) / ipow(s, n - 1); }, n, lo, hi);
  }
  return sum;
}

BallReport ball_condition_check(const RadialMeasure& m, int samples) {
  if (samples < 1) throw ConfigError("ball check: samples must be >= 1");
  m.validate();
  const RadialDomain& d = m.domain;
  std::vector<double> centers{0.5 * (d.r_a + d.r_b)};
  for (const Atom& a : m.atoms) centers.push_back(a.radius);
  for (int k = 1; k <= samples; ++k) centers.push_back(d.r_a + (d.r_b - d.r_a) * k / (samples + 1.0));
  BallReport rep;
  for (double rho : centers) {
    const double rmax = std::min(rho - d.r_a, d.r_b - rho);
    if (!(rmax > 0.0)) continue;
    std::vector<double> radii;
    for (int k = 1; k <= samples; ++k) radii.push_back(rmax * k / samples);
    for (int j = 1; j <= 20; ++j) radii.push_back(rmax * std::ldexp(1.0, -j));
    for (double r : radii) {
      const double ratio = std::abs(ball_measure(m, rho, r)) / d.sphere_area(r);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.center_radius = rho;
        rep.ball_radius = r;
      }
    }
  }
  rep.violated = rep.worst_ratio > 1.0;
  return rep;
}

DensityBound density_bound_check(const RadialMeasure& m) {
  m.validate();
  DensityBound out;
  if (m.atoms.empty()) return out;
  const RadialDomain& d = m.domain;
  std::vector<double> marks{d.r_a};
  for (const Atom& a : m.atoms) marks.push_back(a.radius);
  marks.push_back(d.r_b);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) gap = std::min(gap, marks[k + 1] - marks[k]);
  out.rho_bar = 0.5 * gap;
  out.Lambda = unit_sphere_area(d.n);
  // A ball of radius < rho_bar meets at most one sphere; check the cap bound
  // for centers at several distances from each sphere.
  for (const Atom& a : m.atoms) {
    for (int i = 1; i <= 16; ++i) {
      const double rho = out.rho_bar * i / 16.0;
      for (int k = 0; k <= 8; ++k) {
        const double dist = rho * k / 8.0;
        for (double c : {a.radius + dist, a.radius - dist}) {
          const double cap = spherical_cap_area(d.n, a.radius, c, rho);
          if (cap > out.Lambda * ipow(rho, d.n - 1) * (1.0 + 1e-12)) {
            out.ok = false;
            out.failure = "cap area exceeds Lambda rho^{n-1} at sphere r=" + std::to_string(a.radius);
            return out;
          }
        }
      }
    }
  }
  return out;
}

nlohmann::json measure_to_json(const RadialMeasure& m) {
  nlohmann::json j;
  j["n"] = m.domain.n;
  j["r_a"] = m.domain.r_a;
  j["r_b"] = m.domain.r_b;
  j["R_B"] = m.domain.R_B;
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : m.atoms) atoms.push_back({a.radius, a.weight});
  j["atoms"] = atoms;
  nlohmann::json pieces = nlohmann::json::array(), bumps = nlohmann::json::array();
  for (const DensityPiece& p : m.density.pieces) pieces.push_back({{"lo", p.lo}, {"hi", p.hi}, {"coeffs", p.coeffs}});
  for (const DensityBump& q : m.density.bumps)
    bumps.push_back({{"center", q.center}, {"width", q.width}, {"flux", q.flux}});
  j["density"] = {{"pieces", pieces}, {"bumps", bumps}};
  return j;
}

RadialMeasure measure_from_json(const nlohmann::json& j) {
  RadialMeasure m;
  m.domain = {j.at("n").get<int>(), j.at("r_a").get<double>(), j.at("r_b").get<double>(), j.at("R_B").get<double>()};
  if (j.contains("atoms"))
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw ConfigError("measure: atoms must be [radius, weight] pairs");
      m.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  if (j.contains("density")) {
    const auto& dj = j.at("density");
    if (dj.contains("pieces"))
      for (const auto& p : dj.at("pieces"))
        m.density.pieces.push_back({p.at("lo").get<double>(), p.at("hi").get<double>(),
                                    p.at("coeffs").get<std::vector<double>>()});
    if (dj.contains("bumps"))
      for (const auto& q : dj.at("bumps"))
        m.density.bumps.push_back({q.at("center").get<double>(), q.at("width").get<double>(), q.at("flux").get<double>()});
  }
  m.validate();
  return m;
}

}  // namespace pmcm
