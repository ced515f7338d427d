#pragma once

#include "pmcm/core_bv.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pmcm {

struct Atom {
  double radius = 0.0;
  double weight = 0.0;  // mass per unit (n-1)-area of the sphere
};

// h(r) = sum_k coeffs[k] * r^k on [lo, hi).
struct DensityPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coeffs;
  double operator()(double r) const;
};

// h(r) r^{n-1} = flux * rho_width(r - center): a smoothed sphere of total
// flux `flux` (mass flux / n omega_n).
struct DensityBump {
  double center = 0.0;
  double width = 0.0;
  double flux = 0.0;
};

struct RadialDensity {
  std::vector<DensityPiece> pieces;
  std::vector<DensityBump> bumps;

  bool empty() const { return pieces.empty() && bumps.empty(); }
  double value(double r, int n) const;
  std::vector<double> breakpoints() const;
  // \int_a^b h(s) s^{n-1} ds. Exact for bumps via the tabulated cumulative.
  double flux(int n, double a, double b) const;
  // \int_a^b f(s) h(s) s^{n-1} ds by composite Gauss-Legendre.
  double integrate(const std::function<double(double)>& f, int n, double a, double b) const;
};

struct RadialMeasure {
  RadialDomain domain;
  std::vector<Atom> atoms;
  RadialDensity density;

  void validate() const;
  bool atoms_only() const { return density.empty(); }
  bool is_zero() const;
  double total_variation() const;
  // n omega_n * (sum of atom fluxes with r_i < r, plus r_i == r if include_at,
  // plus the density flux over (r_a, r)).
  double cumulative(double r, bool include_at) const;
};

struct HahnSplit {
  std::vector<int> atom_negative;
  // maximal subintervals of (r_a, r_b) where h < 0
  std::vector<std::pair<double, double>> density_negative;

  int atom_lambda(std::size_t i) const { return atom_negative[i]; }
  int density_lambda(double r) const;
};

struct RadialInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = false;
  bool hi_closed = false;
};
using RadialSet = std::vector<RadialInterval>;

struct NonExtremalityReport {
  double L_hat = 0.0;
  double s = 0.0;  // optimizing annulus (s, t); *_included say whether
  double t = 0.0;  // an atom sitting at that radius is counted
  bool s_included = false;
  bool t_included = false;
  std::size_t candidates = 0;
  std::optional<double> analytic;  // closed form for a single atom, no density
  bool lower_bound = true;         // only radial annuli are searched
};

struct BallReport {
  double worst_ratio = 0.0;
  double center_radius = 0.0;
  double ball_radius = 0.0;
  bool violated = false;
};

struct DensityBound {
  bool ok = true;
  double Lambda = 0.0;
  double rho_bar = 0.0;
  std::string failure;
};

HahnSplit hahn_lambda(const RadialMeasure& m);
double measure_of(const RadialMeasure& m, const RadialSet& set);
// Restriction of measure_of to {lambda == 0} and {lambda == 1}.
std::pair<double, double> measure_of_split(const RadialMeasure& m, const HahnSplit& lam, const RadialSet& set);

NonExtremalityReport nonextremality(const RadialMeasure& m, int resolution, bool parallel = true);
inline double nonextremality_ratio(const RadialMeasure& m, int resolution) {
  return nonextremality(m, resolution).L_hat;
}

// Area of {y : |y| = R, |y - x| < r} for |x| = rho.
double spherical_cap_area(int n, double R, double rho, double r);
double ball_measure(const RadialMeasure& m, double rho, double r);
BallReport ball_condition_check(const RadialMeasure& m, int samples);
DensityBound density_bound_check(const RadialMeasure& m);

nlohmann::json measure_to_json(const RadialMeasure& m);
RadialMeasure measure_from_json(const nlohmann::json& j);

}  // namespace pmcm
