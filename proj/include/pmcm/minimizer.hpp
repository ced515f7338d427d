#pragma once

#include "pmcm/core_bv.hpp"
#include "pmcm/kernels.hpp"
#include "pmcm/measures.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace pmcm {

struct RadialProblem {
  RadialMeasure measure;
  double phi_a = 0.0;
  double phi_b = 0.0;
  std::vector<double> grid;  // must contain every atom radius
};

// Uniform-per-segment grid of step <= h with nodes at every breakpoint.
std::vector<double> radial_grid(const RadialDomain& d, double h, std::vector<double> breakpoints = {});
RadialProblem make_radial_problem(const RadialMeasure& m, double phi_a, double phi_b, double h,
                                  std::vector<double> extra_breakpoints = {});

// Chain of unknowns along the grid. Atom nodes carry two unknowns (inner and
// outer side) joined by a slot edge; every other edge is a cell.
struct AssembledRadial {
  int n = 2;
  double flat = 0.0;  // |B \ Omega|
  double S_a = 0.0, S_b = 0.0;
  double phi_a = 0.0, phi_b = 0.0;
  std::vector<std::size_t> node_of;  // unknown -> grid node
  std::vector<std::size_t> inner_unknown, outer_unknown;
  std::vector<unsigned char> is_slot;  // per edge e = (e, e+1)
  std::vector<double> weight;          // cell: W = n omega_n m^{n-1} dr; slot: S (1 - |mu|/2)
  std::vector<double> width;           // cell: dr; slot: 1
  std::vector<double> bound;           // |edge flux| <= bound
  std::vector<double> slot_mu;         // per edge, 0 on cells
  std::vector<double> lin;             // per unknown

  std::size_t unknowns() const { return node_of.size(); }
  std::size_t edges() const { return is_slot.size(); }
};

AssembledRadial assemble(const RadialProblem& p);
double energy(const AssembledRadial& a, const std::vector<double>& v);
double energy(const RadialProblem& p, const RadialProfile& u);
std::vector<double> unknowns_from_profile(const AssembledRadial& a, const RadialProfile& u);

// Best dual objective over the one-parameter family of divergence-feasible
// fluxes; edge_flux holds the maximizer.
struct DualCertificate {
  bool feasible = false;
  double value = 0.0;
  double anchor = 0.0;
  std::vector<double> edge_flux;
};
DualCertificate certify(const AssembledRadial& a);

struct SaddleState {
  std::vector<double> v;       // primal unknowns
  std::vector<double> w0, w;   // per edge, meaningful on cells
  std::vector<double> z;       // per edge, meaningful on slots
  double za = 0.0, zb = 0.0;   // boundary trace duals
  double sigma = 0.0, tau = 0.0;
  std::size_t iters = 0;
  double gap = 0.0;
  // w0^2 + w^2 over cells, and |z|, |za|, |zb|
  double max_dual_norm() const;
};

struct ConvergenceReport {
  double energy = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::size_t iters = 0;
  double L_hat = 0.0;
  bool converged = false;
  std::string status;
  double h = 0.0;
  std::size_t cells = 0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

struct MinimizeOptions {
  double tol_gap = 1e-6;
  std::size_t max_iter = 1000000;
  std::size_t check_every = 1000;
  int power_iterations = 20;
};

struct RadialMinimizer {
  RadialProfile u;
  RadialField T;  // certified divergence-feasible field
  ConvergenceReport report;
  SaddleState state;
};

RadialMinimizer minimize(const RadialProblem& p, const MinimizeOptions& opt = {});

// ---------------------------------------------------------------------------
// 2D Cartesian carrier, absolutely continuous density only.

struct Problem2D {
  GridFunction2D datum;               // values at fixed nodes are the boundary datum
  std::vector<unsigned char> free;    // 1 on nodes inside Omega
  std::vector<double> density;        // f at nodes
  double box_half_width = 1.0;        // the gap is certified over [min datum - M, max datum + M]
};

// Square B = [-R_B, R_B]^2 with Omega the annulus r_a < |x| < r_b; the datum is
// phi_a inside and phi_b outside, the density is constant f.
Problem2D make_annulus_problem(double r_a, double r_b, double R_B, double h, double phi_a, double phi_b,
                               double f = 0.0);

struct Minimizer2D {
  GridFunction2D u;
  kernels::Dual2D dual;
  ConvergenceReport report;
};

double energy_2d(const Problem2D& p, const std::vector<double>& u, bool parallel = true);
double dual_2d(const Problem2D& p, const kernels::Dual2D& d);
Minimizer2D minimize_2d(const Problem2D& p, const MinimizeOptions& opt = {}, bool parallel = true);

}  // namespace pmcm
