#pragma once

#include "pmcm/core_bv.hpp"
#include "pmcm/measures.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmcm {

// ---------------------------------------------------------------------------
// Flux coefficients. Templated on the scalar so that callers can run the
// propagation in exact rational arithmetic.

template <class S>
S power(const S& r, int k) {
  S out(1);
  for (int i = 0; i < k; ++i) out *= r;
  return out;
}

template <class S>
int sign_of(const S& v) {
  return (S(0) < v) - (v < S(0));
}

struct FieldAnchor {
  enum class Kind { Value, JumpRule };
  Kind kind = Kind::Value;
  std::size_t index = 0;  // interval index for Value, atom index for JumpRule
  double gamma = 0.0;

  static FieldAnchor value(std::size_t interval, double g) { return {Kind::Value, interval, g}; }
  static FieldAnchor jump_rule(std::size_t atom) { return {Kind::JumpRule, atom, 0.0}; }
};

template <class S>
struct FieldCoefficients {
  std::vector<S> gamma;  // one per interval: [r_a, r_1], [r_1, r_2], ..., [r_k, r_b]
  bool feasible = true;
  std::size_t offending = std::numeric_limits<std::size_t>::max();
};

// atoms: (radius, weight) sorted by radius. For the jump rule at atom i the
// flux just outside sphere i is sign(mu_i) r_i^{n-1}.
template <class S>
FieldCoefficients<S> propagate_field(int n, const S& r_a, const std::vector<std::pair<S, S>>& atoms, int anchor_kind,
                                     std::size_t anchor_index, const S& anchor_gamma) {
  const std::size_t k = atoms.size();
  FieldCoefficients<S> out;
  out.gamma.assign(k + 1, S(0));
  std::size_t pinned = std::numeric_limits<std::size_t>::max();
  std::size_t start = anchor_index;
  if (anchor_kind == static_cast<int>(FieldAnchor::Kind::JumpRule)) {
    const auto& [r, w] = atoms.at(anchor_index);
    start = anchor_index + 1;
    out.gamma[start] = S(sign_of(w)) * power(r, n - 1);
    pinned = start;
  } else {
    out.gamma.at(start) = anchor_gamma;
  }
  for (std::size_t i = start + 1; i <= k; ++i)
    out.gamma[i] = out.gamma[i - 1] + atoms[i - 1].second * power(atoms[i - 1].first, n - 1);
  for (std::size_t i = start; i-- > 0;) out.gamma[i] = out.gamma[i + 1] - atoms[i].second * power(atoms[i].first, n - 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const S bound = power(i == 0 ? r_a : atoms[i - 1].first, n - 1);
    const S mag = out.gamma[i] < S(0) ? S(-out.gamma[i]) : out.gamma[i];
    // Equality is a saturated field on the outer side of a sphere: allowed
    // at r_a (boundary jump) and at atoms whose sign matches the field's.
    bool ok = mag < bound;
    if (!ok && mag == bound) ok = (i == pinned) || i == 0 || sign_of(out.gamma[i]) == sign_of(atoms[i - 1].second);
    if (!ok) {
      out.feasible = false;
      out.offending = i;
      break;
    }
  }
  return out;
}

FieldCoefficients<double> field_coefficients(const RadialMeasure& m, const FieldAnchor& anchor);

enum class JumpClass { JumpUp, JumpDown, ContinuousOnly, Infeasible };
const char* to_string(JumpClass c);

template <class S>
struct JumpWindow {
  JumpClass cls = JumpClass::ContinuousOnly;
  S lower;
  S upper;
  bool at_lower = false;
  bool at_upper = false;
};

template <class S>
JumpWindow<S> classify_jump(int n, const S& r_inner, const S& r_atom, const S& mu) {
  JumpWindow<S> out;
  S q = S(1);
  for (int i = 0; i < n - 1; ++i) q = q * r_inner / r_atom;
  out.lower = S(1) - q;
  out.upper = S(1) + q;
  const S mag = mu < S(0) ? S(-mu) : mu;
  out.at_lower = (mag == out.lower);
  out.at_upper = (mag == out.upper);
  if (out.upper < mag || out.at_upper)
    out.cls = JumpClass::Infeasible;
  else if (mag < out.lower || out.at_lower)
    out.cls = JumpClass::ContinuousOnly;
  else
    out.cls = mu < S(0) ? JumpClass::JumpDown : JumpClass::JumpUp;
  return out;
}

JumpWindow<double> jump_classification(int n, double r_inner, double r_atom, double mu);

// ---------------------------------------------------------------------------
// Catenoidal integrals on one interval with constant flux gamma:
//   increment  = \int_a^b gamma / sqrt(s^{2n-2} - gamma^2) ds
//   area       = \int_a^b s^{2n-2} / sqrt(s^{2n-2} - gamma^2) ds
//   conjugate  = \int_a^b sqrt(s^{2n-2} - gamma^2) ds
// All require |gamma| <= a^{n-1}.

double profile_increment(double gamma, int n, double a, double b);
double catenoid_area(double gamma, int n, double a, double b);
double conjugate_area(double gamma, int n, double a, double b);

struct InvertedFlux {
  double gamma;
  bool saturated;  // |du| exceeds the increment reachable with |gamma| = a^{n-1}
  double excess;   // vertical remainder when saturated
};
// gamma with profile_increment(gamma, n, a, b) == du.
InvertedFlux invert_increment(int n, double a, double b, double du);

std::vector<double> integrate_profile(double gamma, int n, double r_lo, double r_hi, double base,
                                      const std::vector<double>& grid);

// ---------------------------------------------------------------------------

struct SolutionPiece {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double gamma = 0.0;
  double base = 0.0;  // u(r_lo+)
};

struct SolutionJump {
  double radius = 0.0;
  double height = 0.0;
  int direction = 1;  // +1: u increases across the sphere with r
};

struct BoundaryAttainment {
  bool inner_classical = true;
  bool outer_classical = true;
  double inner_jump = 0.0;  // u(r_a+) - phi_a
  double outer_jump = 0.0;  // phi_b - u(r_b-)
};

class RadialSolution {
 public:
  RadialSolution() = default;
  RadialSolution(RadialDomain domain, std::vector<SolutionPiece> pieces, double phi_a, double phi_b);

  const RadialDomain& domain() const { return domain_; }
  const std::vector<SolutionPiece>& pieces() const { return pieces_; }
  const std::vector<SolutionJump>& jumps() const { return jumps_; }
  const BoundaryAttainment& boundary() const { return boundary_; }
  double phi_a() const { return phi_a_; }
  double phi_b() const { return phi_b_; }
  double base_value() const { return pieces_.front().base; }
  std::vector<double> gammas() const;

  // side < 0: inner limit, side > 0: outer limit.
  double value(double r, int side = 1) const;
  std::size_t piece_index(double r, int side = 1) const;

  // Grid must contain every piece endpoint.
  RadialProfile sample(const std::vector<double>& grid) const;
  RadialField field(const std::vector<double>& grid) const;
  nlohmann::json to_json() const;

 private:
  RadialDomain domain_;
  std::vector<SolutionPiece> pieces_;
  std::vector<SolutionJump> jumps_;
  BoundaryAttainment boundary_;
  double phi_a_ = 0.0;
  double phi_b_ = 0.0;
};

struct TraceLimits {
  double inner;
  double outer;
};
TraceLimits evaluate_T(const RadialSolution& sol, double r);

// Sphere radii (r_a or atom radii) where the extra height is spent when the
// data exceed the catenoidal range. Two or more locations form a family.
class SolutionFamily {
 public:
  SolutionFamily() = default;
  SolutionFamily(RadialSolution base, std::vector<std::size_t> pieces, double deficit, int direction);

  const std::vector<std::size_t>& locations() const { return pieces_; }
  double deficit() const { return deficit_; }
  int direction() const { return direction_; }
  std::pair<double, double> translation_interval() const { return {0.0, deficit_}; }
  // Heights spent at each location; they must be >= 0 and sum to deficit().
  RadialSolution member(const std::vector<double>& heights) const;
  // Two-location family: first location gets t, the second deficit - t.
  RadialSolution member(double t) const;

 private:
  RadialSolution base_;
  std::vector<std::size_t> pieces_;
  double deficit_ = 0.0;
  int direction_ = 1;
};

enum class SolveStatus { Unique, Family, Infeasible };
const char* to_string(SolveStatus s);

struct RadialSolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<RadialSolution> solution;
  std::optional<SolutionFamily> family;
  std::vector<JumpWindow<double>> windows;
  double L_hat = 0.0;
  double increment_low = 0.0;   // total increment at the lowest admissible anchor
  double increment_high = 0.0;  // at the highest; this is the oscillation bound C
  std::string diagnostic;
};

RadialSolveResult solve_dirichlet_radial(const RadialMeasure& m, double phi_a, double phi_b);

double energy_radial(const RadialSolution& sol, const RadialMeasure& m);
// Profile extended by phi_a, phi_b outside Omega; trace mismatch counts as jumps.
double energy_radial(const RadialProfile& p, const RadialMeasure& m, double phi_a, double phi_b);

}  // namespace pmcm
