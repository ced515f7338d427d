#pragma once

#include <json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace pmcm {

// (n-1)-area of the unit sphere in R^n, i.e. n * omega_n.
double unit_sphere_area(int n);
// Lebesgue measure omega_n of the unit ball in R^n.
double unit_ball_volume(int n);
double ipow(double r, int k);

struct RadialDomain {
  int n = 2;
  double r_a = 1.0;
  double r_b = 3.0;
  double R_B = 4.0;

  void validate() const;
  double sphere_area(double r) const { return unit_sphere_area(n) * ipow(r, n - 1); }
  double shell_volume(double lo, double hi) const;
  double ball_volume() const { return shell_volume(0.0, R_B); }
  // |B \ Omega|: the region where candidates are frozen to the boundary datum.
  double outside_volume() const { return shell_volume(0.0, r_a) + shell_volume(r_b, R_B); }
};

// Jump record at a grid node. u_plus >= u_minus always; orientation is +1
// when the upper trace lies on the outer side (the profile rises with r).
struct Jump {
  std::size_t node = 0;
  double u_minus = 0.0;
  double u_plus = 0.0;
  int orientation = 1;
  double snap = 0.0;

  double height() const { return u_plus - u_minus; }
  double inner() const { return orientation > 0 ? u_minus : u_plus; }
  double outer() const { return orientation > 0 ? u_plus : u_minus; }
};

struct SnappedNode {
  std::size_t node;
  double distance;
};
SnappedNode snap_to_grid(const std::vector<double>& grid, double radius);

// Jump record from inner/outer limits; radius is snapped to the nearest node.
Jump make_jump(const std::vector<double>& grid, double radius, double inner, double outer);

// Piecewise linear profile on a radial grid. values[j] is the node value, and
// at a jump node it is the inner (left) limit; the outer limit is in the record.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(RadialDomain domain, std::vector<double> grid, std::vector<double> values,
                std::vector<Jump> jumps = {});

  const RadialDomain& domain() const { return domain_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  std::size_t nodes() const { return grid_.size(); }
  std::size_t cells() const { return grid_.size() - 1; }

  const Jump* jump_at(std::size_t node) const;
  double inner(std::size_t node) const { return values_[node]; }
  double outer(std::size_t node) const;
  double slope(std::size_t cell) const;
  double cell_midpoint(std::size_t cell) const { return 0.5 * (grid_[cell] + grid_[cell + 1]); }
  double cell_width(std::size_t cell) const { return grid_[cell + 1] - grid_[cell]; }
  // Volume of the shell swept by the cell; TV and area are exact for linear cells.
  double cell_volume(std::size_t cell) const;

  double trace_inner() const { return values_.front(); }
  double trace_outer() const { return values_.back(); }

  // side < 0: inner limit, side > 0: outer limit. Linear between nodes.
  double value(double r, int side = 1) const;
  double sup_abs() const;

  nlohmann::json to_json() const;
  static RadialProfile from_json(const nlohmann::json& j);
  std::string to_csv() const;

 private:
  RadialDomain domain_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<Jump> jumps_;
  std::vector<int> jump_index_;
};

// Radial field T(r) = flux[i] / r^{n-1} on cell i, i.e. a divergence-free
// radial field inside each cell. Traces at nodes follow from adjacent cells.
struct RadialField {
  RadialDomain domain;
  std::vector<double> grid;
  std::vector<double> flux;

  std::size_t cells() const { return flux.size(); }
  double at(std::size_t cell, double r) const { return flux[cell] / ipow(r, domain.n - 1); }
  double midpoint(std::size_t cell) const { return at(cell, 0.5 * (grid[cell] + grid[cell + 1])); }
  double trace_left(std::size_t node) const { return at(node - 1, grid[node]); }
  double trace_right(std::size_t node) const { return at(node, grid[node]); }
  double sup_abs() const;
  RadialField scaled(double c) const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct GridFunction2D {
  double x0 = 0.0;
  double y0 = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double h = 0.0;
  std::vector<double> values;

  GridFunction2D() = default;
  GridFunction2D(double x0, double y0, std::size_t nx, std::size_t ny, double h, double fill = 0.0);
  void validate() const;
  double& at(std::size_t i, std::size_t j) { return values[j * nx + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  double x(std::size_t i) const { return x0 + h * static_cast<double>(i); }
  double y(std::size_t j) const { return y0 + h * static_cast<double>(j); }
};

double total_variation(const RadialProfile& p);
double area_functional(const RadialProfile& p);
// Sum of cell volumes; the |Omega| that pairs with the two functionals above.
double discrete_volume(const RadialProfile& p);

double lambda_representative(double u_plus, double u_minus, double lam);
double m_bound(double u_plus, double u_minus, double lam);
RadialProfile truncate(const RadialProfile& p, double k);

}  // namespace pmcm
