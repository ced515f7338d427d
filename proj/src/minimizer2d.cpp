#include "pmcm/minimizer.hpp"

#include "pmcm/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pmcm {

namespace {

kernels::Grid2D grid_of(const Problem2D& p) { return {p.datum.nx, p.datum.ny, p.datum.h}; }

void check(const Problem2D& p) {
  p.datum.validate();
  const std::size_t N = p.datum.values.size();
  if (p.free.size() != N || p.density.size() != N) throw ConfigError("2d problem: mask/density size mismatch");
  const auto& g = p.datum;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if ((i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny) && p.free[j * g.nx + i])
        throw ConfigError("2d problem: Omega must stay away from the edge of B");
}

// (K^T w)_p restricted to the grid; same stencil as the kernels.
double adjoint(const kernels::Grid2D& g, const kernels::Dual2D& d, std::size_t i, std::size_t j) {
  double out = 0.0;
  if (i + 1 < g.nx && j + 1 < g.ny) out -= d.wx[g.cell(i, j)] + d.wy[g.cell(i, j)];
  if (i > 0 && j + 1 < g.ny) out += d.wx[g.cell(i - 1, j)];
  if (j > 0 && i + 1 < g.nx) out += d.wy[g.cell(i, j - 1)];
  return g.h * out;
}

double operator_norm_2d(const Problem2D& p, int iterations) {
  const kernels::Grid2D g = grid_of(p);
  std::vector<double> v(g.nodes(), 0.0);
  for (std::size_t q = 0; q < v.size(); ++q)
    if (p.free[q]) v[q] = std::sin(0.61 * static_cast<double>(q)) + 0.3;
  kernels::Dual2D d{std::vector<double>(g.cells()), std::vector<double>(g.cells()), std::vector<double>(g.cells())};
  double lam = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
      for (std::size_t i = 0; i + 1 < g.nx; ++i) {
        const double u00 = v[g.node(i, j)];
        d.wx[g.cell(i, j)] = g.h * (v[g.node(i + 1, j)] - u00);
        d.wy[g.cell(i, j)] = g.h * (v[g.node(i, j + 1)] - u00);
      }
    double nrm = 0.0, vn = 0.0;
    std::vector<double> t(g.nodes(), 0.0);
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        if (p.free[g.node(i, j)]) t[g.node(i, j)] = adjoint(g, d, i, j);
    for (std::size_t q = 0; q < v.size(); ++q) {
      nrm += t[q] * t[q];
      vn += v[q] * v[q];
    }
    if (nrm == 0.0) break;
    lam = std::sqrt(nrm / vn);
    nrm = std::sqrt(nrm);
    for (std::size_t q = 0; q < v.size(); ++q) v[q] = t[q] / nrm;
  }
  return std::sqrt(lam);
}

}  // namespace

Problem2D make_annulus_problem(double r_a, double r_b, double R_B, double h, double phi_a, double phi_b, double f) {
  if (!(0.0 < r_a && r_a < r_b && r_b < R_B)) throw ConfigError("annulus: need 0 < r_a < r_b < R_B");
  const auto n = static_cast<std::size_t>(std::llround(2.0 * R_B / h)) + 1;
  Problem2D p;
  p.datum = GridFunction2D(-R_B, -R_B, n, n, h);
  p.free.assign(n * n, 0);
  p.density.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::hypot(p.datum.x(i), p.datum.y(j));
      const std::size_t q = j * n + i;
      if (r > r_a && r < r_b) {
        p.free[q] = 1;
        p.density[q] = f;
        p.datum.values[q] = phi_a + (phi_b - phi_a) * (r - r_a) / (r_b - r_a);
      } else {
        p.datum.values[q] = r <= r_a ? phi_a : phi_b;
      }
    }
  p.box_half_width = 1.0 + std::abs(phi_b - phi_a);
  return p;
}

double energy_2d(const Problem2D& p, const std::vector<double>& u, bool parallel) {
  const kernels::Grid2D g = grid_of(p);
  return parallel ? kernels::energy(g, u, p.density, p.free) : kernels::energy_serial(g, u, p.density, p.free);
}

double dual_2d(const Problem2D& p, const kernels::Dual2D& d) {
  const kernels::Grid2D g = grid_of(p);
  double lo = p.datum.values.front(), hi = lo;
  for (std::size_t q = 0; q < g.nodes(); ++q)
    if (!p.free[q]) {
      lo = std::min(lo, p.datum.values[q]);
      hi = std::max(hi, p.datum.values[q]);
    }
  lo -= p.box_half_width;
  hi += p.box_half_width;
  const double h2 = g.h * g.h;
  double value = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double s = d.wx[c] * d.wx[c] + d.wy[c] * d.wy[c];
    value += h2 * std::sqrt(std::max(0.0, 1.0 - s));
  }
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t q = g.node(i, j);
      const double a = adjoint(g, d, i, j);
      if (p.free[q]) {
        const double c = a + h2 * p.density[q];
        value += std::min(c * lo, c * hi);
      } else {
        value += a * p.datum.values[q];
      }
    }
  return value;
}

Minimizer2D minimize_2d(const Problem2D& p, const MinimizeOptions& opt, bool parallel) {
  check(p);
  const auto t0 = std::chrono::steady_clock::now();
  const kernels::Grid2D g = grid_of(p);
  ConvergenceReport rep;
  rep.h = g.h;
  rep.cells = g.cells();
  std::vector<double> u = p.datum.values, u_bar = u;
  kernels::Dual2D d{std::vector<double>(g.cells(), 0.0), std::vector<double>(g.cells(), 0.0),
                    std::vector<double>(g.cells(), 0.0)};
  const double L = 1.01 * operator_norm_2d(p, opt.power_iterations);
  const double sigma = L > 0.0 ? 1.0 / L : 1.0, tau = sigma;
  const double e0 = energy_2d(p, u, parallel);
  rep.status = "max_iter";
  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    if (parallel) {
      kernels::dual_step(g, u_bar, sigma, d);
      kernels::primal_step(g, d, p.density, p.free, tau, u, u_bar);
    } else {
      kernels::dual_step_serial(g, u_bar, sigma, d);
      kernels::primal_step_serial(g, d, p.density, p.free, tau, u, u_bar);
    }
    if ((it + 1) % opt.check_every == 0 || it + 1 == opt.max_iter) {
      rep.energy = energy_2d(p, u, parallel);
      if (!std::isfinite(rep.energy) || std::abs(rep.energy) > 10.0 * std::max(1.0, std::abs(e0))) {
        rep.status = "diverged";
        ++it;
        break;
      }
      rep.dual = dual_2d(p, d);
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
  rep.energy = energy_2d(p, u, parallel);
  rep.dual = dual_2d(p, d);
  rep.gap = rep.energy - rep.dual;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  GridFunction2D out = p.datum;
  out.values = std::move(u);
  return {std::move(out), std::move(d), rep};
}

}  // namespace pmcm
