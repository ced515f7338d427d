#pragma once

#include "pmcm/core_bv.hpp"
#include "pmcm/measures.hpp"

#include <string>

namespace pmcm {

struct CertificateReport {
  double sup_norm_T = 0.0;
  double div_residual = 0.0;
  double pairing_residual = 0.0;
  double t_formula_residual = 0.0;
  double jump_trace_residual = 0.0;
  double tol = 0.0;
  bool pass_bound = false;  // |T| <= 1
  bool pass_pairing = false;  // pairing identity
  bool pass_divergence = false;  // div T = mu
  bool pass_t_formula = false;  // T = grad u / sqrt(1 + |grad u|^2), saturated traces on jumps

  bool pass() const { return pass_bound && pass_pairing && pass_divergence && pass_t_formula; }
  std::string failed_conditions() const;
  nlohmann::json to_json() const;
};

// Cells are read as catenoid pieces through the node values; T is read with
// the per-cell flux convention of RadialField.
CertificateReport verify_weak_solution(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                                       const HahnSplit& lam, double tol);

struct TFormulaResult {
  double residual = 0.0;             // sum over cells of |T - T(u)| dx
  // sum over jumps of |S_r| |u+ - u-| |1 - nu_u . T|, T taken on the lambda side
  double jump_trace_residual = 0.0;
  bool pass = false;
};
TFormulaResult check_T_formula(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                               const HahnSplit& lam, double tol);
// Zero-measure convention: lambda = 0 at every jump.
TFormulaResult check_T_formula(const RadialProfile& u, const RadialField& T, double tol);

// Sup over a nested family of radial bumps of |int T.grad psi + int psi dmu| / ||psi||_{W^{1,1}}.
double divergence_residual(const RadialField& T, const RadialMeasure& m);

struct PairingBalance {
  double area = 0.0;       // area of u over Omega
  double conjugate = 0.0;  // int sqrt(1 - |T|^2)
  double pairing = 0.0;    // total mass of (T, Du)_lambda
  double tv_distance = 0.0;
  double defect() const { return area - conjugate - pairing; }
};
PairingBalance pairing_balance(const RadialProfile& u, const RadialField& T, const RadialMeasure& m,
                               const HahnSplit& lam);

struct MidpointVerdict {
  bool refused = false;
  std::string reason;
  double slack = 0.0;  // C(T_mid) - (C(T1) + C(T2)) / 2, >= 0 by concavity
  double budget = 0.0;
  double defect1 = 0.0;
  double defect2 = 0.0;
  bool consistent = true;  // false: T1 and T2 cannot both pair with u
};
MidpointVerdict midpoint_uniqueness_test(const RadialProfile& u, const RadialField& T1, const RadialField& T2,
                                         const RadialMeasure& m, const HahnSplit& lam, double tol);

struct MaxPrincipleVerdict {
  bool refused = false;
  std::string failed_hypothesis;
  bool holds = false;
  double worst_violation = 0.0;  // min over nodes of u1 - u2
  double worst_radius = 0.0;
};
MaxPrincipleVerdict compare_max_principle(const RadialProfile& u1, const RadialProfile& u2, const RadialMeasure& m1,
                                          const RadialMeasure& m2, double tol);

}  // namespace pmcm
