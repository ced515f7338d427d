#pragma once

#include "pmcm/core_bv.hpp"
#include "pmcm/measures.hpp"
#include "pmcm/minimizer.hpp"

#include <string>
#include <vector>

namespace pmcm {

// Atoms become bumps of half-width delta carrying the same flux; the absolutely
// continuous part is kept unchanged.
RadialMeasure mollify_measure(const RadialMeasure& m, double delta);

struct GammaConfig {
  RadialMeasure measure;
  double phi_a = 0.0;
  double phi_b = 0.0;
  double h = 5e-3;
  std::vector<double> deltas;  // strictly decreasing
  MinimizeOptions options;
  int resolution = 4096;  // nonextremality grid for each mollified measure
  int jobs = 1;
};

struct GammaRow {
  double delta = 0.0;
  double energy = 0.0;
  double gap = 0.0;  // energy - limit energy
  double l1_dist = 0.0;
  double L_hat = 0.0;
  double solver_gap = 0.0;
  std::size_t iters = 0;
};

struct GammaTable {
  double limit_energy = 0.0;
  double limit_solver_gap = 0.0;
  std::vector<GammaRow> rows;
  bool monotone = false;  // |gap_k| <= |gap_{k-1}| + 2 * solver tolerance
  double final_gap() const { return rows.empty() ? 0.0 : rows.back().gap; }

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Throws Refused naming the first delta whose mollified measure is extremal.
GammaTable gamma_experiment(const GammaConfig& cfg);

// Weighted L1 distance of two profiles on the same grid.
double l1_distance(const RadialProfile& p, const RadialProfile& q);
// Same function on a finer grid that contains every node of p.
RadialProfile refine(const RadialProfile& p, const std::vector<double>& grid);

// Smooth approximation of a profile by a partition of unity over nested
// boundary strips, each piece mollified with its own width.
class SmoothedProfile {
 public:
  SmoothedProfile(RadialProfile source, double eps, std::vector<double> lam_at_jumps = {});

  double value(double r) const;
  // Samples on the refined grid (source nodes plus a uniform subdivision).
  RadialProfile sample() const { return sample(refined_grid()); }
  RadialProfile sample(const std::vector<double>& grid) const;
  std::vector<double> refined_grid() const;

  double eps() const { return eps_; }
  double width(int k) const;  // mollification width on strip k >= 1
  const RadialProfile& source() const { return src_; }
  // Shift parameter applied at each jump, Phi(tau) = lambda.
  const std::vector<double>& shifts() const { return tau_; }

 private:
  double strip_distance(int k) const { return D_ * std::ldexp(1.0, 1 - k); }
  double cutoff(int k, double t) const;  // psi_k, 1 deep inside, 0 near the boundary
  double weight(int k, double t) const;  // zeta_k
  double term(int k, double x, double shift) const;
  double dist(double r) const;

  double shift_field(double r) const;

  RadialProfile src_;
  double eps_;
  double D_ = 0.0;
  double var_ = 0.0;       // unweighted variation
  double sup_ = 0.0;
  double w_max_ = 0.0;     // largest sphere area over Omega
  double volume_ = 0.0;
  double slope_max_ = 0.0; // sup of the strip transition derivative in its own variable
  std::vector<double> tau_;
  std::vector<double> shift_radius_;
};

SmoothedProfile smooth_profile(const RadialProfile& p, double eps);
SmoothedProfile lambda_smooth_profile(const RadialProfile& p, const std::vector<double>& lam_at_jumps, double eps);

struct RadialSubinterval {
  double lo;
  double hi;
};
// min(M, v) on U, v elsewhere; the mismatch (v - M)_+ at the ends of U becomes jumps.
RadialProfile one_sided_truncate(const RadialProfile& p, RadialSubinterval U, double M);

}  // namespace pmcm
