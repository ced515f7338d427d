#include "pmcm/kernels.hpp"

#include <cmath>

namespace pmcm::kernels {

namespace {

inline void scan_row(const PairScanInput& in, std::size_t i, PairScanResult& best) {
  const std::size_t K = in.x.size();
  for (std::size_t j = i + 1; j < K; ++j) {
    if (!(in.x[i] < in.x[j])) continue;
    const double r = std::abs(in.outer_mass[j] - in.inner_mass[i]) / (in.perimeter[i] + in.perimeter[j]);
    if (r > best.value) best = {r, i, j};
  }
}

inline bool better(const PairScanResult& a, const PairScanResult& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.i < b.i || (a.i == b.i && a.j < b.j);
}

inline void project_ball(double& a0, double& ax, double& ay) {
  const double nr = std::sqrt(a0 * a0 + ax * ax + ay * ay);
  if (nr > 1.0) {
    a0 /= nr;
    ax /= nr;
    ay /= nr;
  }
}

inline void dual_cell(const Grid2D& g, const std::vector<double>& u, double sigma, Dual2D& d, std::size_t i,
                      std::size_t j) {
  const std::size_t c = g.cell(i, j);
  const double u00 = u[g.node(i, j)];
  const double gx = (u[g.node(i + 1, j)] - u00) / g.h;
  const double gy = (u[g.node(i, j + 1)] - u00) / g.h;
  const double s = sigma * g.h * g.h;
  double a0 = d.w0[c] + s, ax = d.wx[c] + s * gx, ay = d.wy[c] + s * gy;
  project_ball(a0, ax, ay);
  d.w0[c] = a0;
  d.wx[c] = ax;
  d.wy[c] = ay;
}

inline double adjoint_at(const Grid2D& g, const Dual2D& d, std::size_t i, std::size_t j) {
  double out = 0.0;
  if (i + 1 < g.nx && j + 1 < g.ny) out -= d.wx[g.cell(i, j)] + d.wy[g.cell(i, j)];
  if (i > 0 && j + 1 < g.ny) out += d.wx[g.cell(i - 1, j)];
  if (j > 0 && i + 1 < g.nx) out += d.wy[g.cell(i, j - 1)];
  return g.h * out;
}

inline void primal_node(const Grid2D& g, const Dual2D& d, const std::vector<double>& f,
                        const std::vector<unsigned char>& free, double tau, std::vector<double>& u,
                        std::vector<double>& u_bar, std::size_t i, std::size_t j) {
  const std::size_t p = g.node(i, j);
  if (!free[p]) {
    u_bar[p] = u[p];
    return;
  }
  const double old = u[p];
  u[p] = old - tau * (adjoint_at(g, d, i, j) + g.h * g.h * f[p]);
  u_bar[p] = 2.0 * u[p] - old;
}

inline double energy_row(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& f,
                         const std::vector<unsigned char>& free, std::size_t j) {
  const double h2 = g.h * g.h;
  double s = 0.0;
  if (j + 1 < g.ny)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const double u00 = u[g.node(i, j)];
      const double gx = (u[g.node(i + 1, j)] - u00) / g.h;
      const double gy = (u[g.node(i, j + 1)] - u00) / g.h;
      s += h2 * std::sqrt(1.0 + gx * gx + gy * gy);
    }
  for (std::size_t i = 0; i < g.nx; ++i)
    if (free[g.node(i, j)]) s += h2 * f[g.node(i, j)] * u[g.node(i, j)];
  return s;
}

}  // namespace

PairScanResult max_pair_ratio_serial(const PairScanInput& in) {
  PairScanResult best;
  for (std::size_t i = 0; i < in.x.size(); ++i) scan_row(in, i, best);
  return best;
}

PairScanResult max_pair_ratio(const PairScanInput& in) {
  const std::size_t K = in.x.size();
  std::vector<PairScanResult> rows(K);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < K; ++i) scan_row(in, i, rows[i]);
  PairScanResult best;
  for (const PairScanResult& r : rows)
    if (r.value > 0.0 && better(r, best)) best = r;
  return best;
}

void dual_step_serial(const Grid2D& g, const std::vector<double>& u_bar, double sigma, Dual2D& d) {
  for (std::size_t j = 0; j + 1 < g.ny; ++j)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) dual_cell(g, u_bar, sigma, d, i, j);
}

void dual_step(const Grid2D& g, const std::vector<double>& u_bar, double sigma, Dual2D& d) {
  const std::size_t rows = g.ny - 1;
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) dual_cell(g, u_bar, sigma, d, i, j);
}

void primal_step_serial(const Grid2D& g, const Dual2D& d, const std::vector<double>& f,
                        const std::vector<unsigned char>& free, double tau, std::vector<double>& u,
                        std::vector<double>& u_bar) {
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) primal_node(g, d, f, free, tau, u, u_bar, i, j);
}

void primal_step(const Grid2D& g, const Dual2D& d, const std::vector<double>& f, const std::vector<unsigned char>& free,
                 double tau, std::vector<double>& u, std::vector<double>& u_bar) {
  const std::size_t rows = g.ny;
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) primal_node(g, d, f, free, tau, u, u_bar, i, j);
}

double energy_serial(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& f,
                     const std::vector<unsigned char>& free) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) s += energy_row(g, u, f, free, j);
  return s;
}

double energy(const Grid2D& g, const std::vector<double>& u, const std::vector<double>& f,
              const std::vector<unsigned char>& free) {
  std::vector<double> rows(g.ny, 0.0);
  const std::size_t ny = g.ny;
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < ny; ++j) rows[j] = energy_row(g, u, f, free, j);
  double s = 0.0;
  for (double r : rows) s += r;
  return s;
}

}  // namespace pmcm::kernels
