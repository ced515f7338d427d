#pragma once

#include <cstddef>
#include <limits>
#include <vector>

// Hot loops, each with an OpenMP version and a serial reference. The parallel
// versions reduce through per-row partial sums combined in fixed order, so
// results do not depend on the thread count.
namespace pmcm::kernels {

struct PairScanInput {
  std::vector<double> x;           // sorted candidate radii
  std::vector<double> inner_mass;  // cumulative mass subtracted when k is the inner endpoint
  std::vector<double> outer_mass;  // cumulative mass when k is the outer endpoint
  std::vector<double> perimeter;   // sphere area at x[k]
};

struct PairScanResult {
  double value = 0.0;
  std::size_t i = std::numeric_limits<std::size_t>::max();
  std::size_t j = std::numeric_limits<std::size_t>::max();
};

// max over i, j with x[i] < x[j] of |outer_mass[j] - inner_mass[i]| / (perimeter[i] + perimeter[j]).
// Ties go to the lexicographically smallest (i, j).
PairScanResult max_pair_ratio_serial(const PairScanInput& in);
PairScanResult max_pair_ratio(const PairScanInput& in);

// 2D carrier: node-major arrays of size nx*ny, cell arrays of size (nx-1)*(ny-1).
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double h = 1.0;
  std::size_t cell(std::size_t i, std::size_t j) const { return j * (nx - 1) + i; }
  std::size_t node(std::size_t i, std::size_t j) const { return j * nx + i; }
  std::size_t cells() const { return (nx - 1) * (ny - 1); }
  std::size_t nodes() const { return nx * ny; }
};

struct Dual2D {
  std::vector<double> w0, wx, wy;
};

// (w0, w) <- P_ball((w0, w) + sigma * h^2 * (1, grad u_bar)).
void dual_step_serial(const Grid2D& g, const std::vector<double>& u_bar, double sigma, Dual2D& d);
void dual_step(const Grid2D& g, const std::vector<double>& u_bar, double sigma, Dual2D& d);

// u <- u - tau * (K^T w + h^2 f) on free nodes; u_bar <- 2u - u_old.
void primal_step_serial(const Grid2D& g, const Dual2D& d, const std::vector<double>& f,
                        const std::vector<unsigned char>& free, double tau, std::vector<double>& u,
                        std::vector<double>& u_bar);
void primal_step(const Grid2D& g, const Dual2D& d, const std::vector<double>& f, const std::vector<unsigned char>& free,
                 double tau, std::vector<double>& u, std::vector<double>& u_bar);

// sum over cells of h^2 sqrt(1 + |grad u|^2) + sum over free nodes of h^2 f u.
double energy_serial(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& f,
                     const std::vector<unsigned char>& free);
double energy(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& f,
              const std::vector<unsigned char>& free);

}  // namespace pmcm::kernels
