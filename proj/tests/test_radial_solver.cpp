#include <doctest.h>

#include "pmcm/radial_solver.hpp"
#include "pmcm/minimizer.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace pmcm;
using boost::multiprecision::cpp_rational;

namespace {

constexpr double pi = std::numbers::pi;

RadialMeasure annulus_with(std::vector<Atom> atoms) {
  RadialMeasure m;
  m.domain = {2, 1.0, 3.0, 4.0};
  m.atoms = std::move(atoms);
  return m;
}

RadialMeasure two_spheres() {
  RadialMeasure m;
  m.domain = {2, 1.0, 4.0, 5.0};
  m.atoms = {{2.0, 0.8}, {3.0, 1.0 / 3}};
  return m;
}

const double J = 0.5;
const double phi_b_jump = 0.290252 + J + 1.924847;

}  // namespace

TEST_CASE("field coefficients in exact arithmetic") {
  const std::vector<std::pair<cpp_rational, cpp_rational>> atoms{{cpp_rational(2), cpp_rational(4, 5)}};
  const auto f = propagate_field<cpp_rational>(2, cpp_rational(1), atoms, static_cast<int>(FieldAnchor::Kind::JumpRule), 0,
                                               cpp_rational(0));
  REQUIRE(f.feasible);
  CHECK(f.gamma[0] == cpp_rational(2, 5));
  CHECK(f.gamma[1] == cpp_rational(2));

  const std::vector<std::pair<cpp_rational, cpp_rational>> two{{cpp_rational(2), cpp_rational(4, 5)},
                                                               {cpp_rational(3), cpp_rational(1, 3)}};
  const auto g = propagate_field<cpp_rational>(2, cpp_rational(1), two, static_cast<int>(FieldAnchor::Kind::JumpRule), 0,
                                               cpp_rational(0));
  REQUIRE(g.feasible);
  CHECK(g.gamma == std::vector<cpp_rational>{cpp_rational(2, 5), cpp_rational(2), cpp_rational(3)});

  const auto w = classify_jump<cpp_rational>(2, cpp_rational(1), cpp_rational(2), cpp_rational(4, 5));
  CHECK(w.cls == JumpClass::JumpUp);
  CHECK(w.lower == cpp_rational(1, 2));
  CHECK(w.upper == cpp_rational(3, 2));
}

TEST_CASE("field coefficients in double precision") {
  const auto f = field_coefficients(annulus_with({{2.0, 0.8}}), FieldAnchor::jump_rule(0));
  REQUIRE(f.gamma.size() == 2);
  CHECK(f.gamma[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(f.gamma[1] == 2.0);
  const auto c = field_coefficients(annulus_with({}), FieldAnchor::value(0, 0.3));
  CHECK(c.gamma == std::vector<double>{0.3});
  // telescoping: gamma_last - gamma_first = sum mu_i r_i^{n-1}
  RadialMeasure m;
  m.domain = {3, 1.0, 4.0, 5.0};
  m.atoms = {{1.5, 0.2}, {2.5, -0.1}, {3.5, 0.05}};
  const auto t = field_coefficients(m, FieldAnchor::value(0, 0.1));
  double sum = 0.0;
  for (const Atom& a : m.atoms) sum += a.weight * a.radius * a.radius;
  CHECK(t.gamma.back() - t.gamma.front() == doctest::Approx(sum).epsilon(1e-14));
  // |gamma_0| > r_a^{n-1}: infeasible, interval 0 named
  const auto bad = field_coefficients(m, FieldAnchor::value(0, 1.5));
  CHECK_FALSE(bad.feasible);
  CHECK(bad.offending == 0);
}

TEST_CASE("jump classification windows") {
  CHECK(jump_classification(2, 1.0, 2.0, 0.8).cls == JumpClass::JumpUp);
  CHECK(jump_classification(2, 1.0, 2.0, -0.8).cls == JumpClass::JumpDown);
  CHECK(jump_classification(2, 1.0, 2.0, 0.3).cls == JumpClass::ContinuousOnly);
  CHECK(jump_classification(2, 1.0, 2.0, 1.6).cls == JumpClass::Infeasible);
  const auto lo = jump_classification(2, 1.0, 2.0, 0.5);
  CHECK(lo.cls == JumpClass::ContinuousOnly);
  CHECK(lo.at_lower);
  const auto hi = jump_classification(2, 1.0, 2.0, 1.5);
  CHECK(hi.cls == JumpClass::Infeasible);
  CHECK(hi.at_upper);
  const auto w3 = jump_classification(3, 1.0, 2.0, 0.8);
  CHECK(w3.lower == doctest::Approx(0.75));
  CHECK(w3.upper == doctest::Approx(1.25));
  CHECK(w3.cls == JumpClass::JumpUp);
}

TEST_CASE("profile increments against the arccosh antiderivative") {
  CHECK(std::abs(profile_increment(2.0, 2, 2.0, 3.0) - 2 * std::acosh(1.5)) < 1e-10);
  CHECK(std::abs(profile_increment(0.4, 2, 1.0, 2.0) - 0.290252) < 1e-6);
  CHECK(std::abs(profile_increment(0.4, 2, 1.0, 2.0) - 0.4 * (std::acosh(5.0) - std::acosh(2.5))) < 1e-12);
  CHECK(profile_increment(0.0, 2, 1.0, 2.0) == 0.0);
  const std::vector<double> grid = radial_grid({2, 1.0, 3.0, 4.0}, 1e-2, {2.0});
  std::vector<double> sub;
  for (double r : grid)
    if (r >= 2.0) sub.push_back(r);
  const std::vector<double> u = integrate_profile(2.0, 2, 2.0, 3.0, 0.0, sub);
  double worst = 0.0;
  for (std::size_t k = 0; k < sub.size(); ++k) worst = std::max(worst, std::abs(u[k] - 2 * std::acosh(sub[k] / 2)));
  CHECK(worst < 1e-10);
  const std::vector<double> flat = integrate_profile(0.0, 2, 2.0, 3.0, 0.7, sub);
  for (double v : flat) CHECK(v == 0.7);
}

TEST_CASE("n = 3 catenoid integrals against tanh-sinh quadrature") {
  boost::math::quadrature::tanh_sinh<double> ts;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int c = 0; c < 40; ++c) {
    const double a = 0.5 + U(rng), b = a + 0.1 + 2 * U(rng);
    const double g = (c % 4 == 0 ? 1.0 : U(rng)) * a * a * (U(rng) < 0.5 ? -1 : 1);
    // s = a + t^2 and s^4 - g^2 = (t^2 (2a + t^2) + a^2 - |g|)(s^2 + |g|) keep the endpoint
    // singularity of the saturated case out of the integrand.
    const double d = a * a - std::abs(g), T = std::sqrt(b - a);
    auto w = [&](double t) {
      const double s = a + t * t;
      const double k = d == 0.0 ? 2 / std::sqrt(2 * a + t * t) : 2 * t / std::sqrt(t * t * (2 * a + t * t) + d);
      return k / std::sqrt(s * s + std::abs(g));
    };
    const double inc = ts.integrate([&](double t) { return g * w(t); }, 0.0, T);
    const double area = ts.integrate([&](double t) { return std::pow(a + t * t, 4) * w(t); }, 0.0, T);
    const double conj = ts.integrate(
        [&](double t) {
          const double s = a + t * t;
          return 2 * t * std::sqrt((t * t * (2 * a + t * t) + d) * (s * s + std::abs(g)));
        },
        0.0, T);
    CHECK(profile_increment(g, 3, a, b) == doctest::Approx(inc).epsilon(1e-9));
    CHECK(catenoid_area(g, 3, a, b) == doctest::Approx(area).epsilon(1e-9));
    CHECK(conjugate_area(g, 3, a, b) == doctest::Approx(conj).epsilon(1e-9));
  }
}

TEST_CASE("n = 2 area integrals against closed forms") {
  // s = g cosh(theta): area = g^2 (theta/2 + sinh(2 theta)/4), conjugate = g^2 (sinh(2 theta)/4 - theta/2)
  const double g = 0.7, a = 1.0, b = 2.5;
  auto F = [g](double s, bool area) {
    const double t = std::acosh(s / g);
    return g * g * (std::sinh(2 * t) / 4 + (area ? t / 2 : -t / 2));
  };
  CHECK(catenoid_area(g, 2, a, b) == doctest::Approx(F(b, true) - F(a, true)).epsilon(1e-13));
  CHECK(conjugate_area(g, 2, a, b) == doctest::Approx(F(b, false) - F(a, false)).epsilon(1e-13));
  CHECK(catenoid_area(0.0, 2, a, b) == doctest::Approx((b * b - a * a) / 2).epsilon(1e-14));
}

TEST_CASE("increment inversion round trip") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    const int n = 2 + c % 2;
    const double a = 0.5 + U(rng), b = a + 0.05 + U(rng);
    const double q = ipow(a, n - 1);
    const double g = (2 * U(rng) - 1) * q * 0.999;
    const double du = profile_increment(g, n, a, b);
    const InvertedFlux f = invert_increment(n, a, b, du);
    CHECK_FALSE(f.saturated);
    CHECK(f.gamma == doctest::Approx(g).epsilon(1e-9).scale(q));
  }
  const double top = profile_increment(1.0, 2, 1.0, 2.0);
  const InvertedFlux s = invert_increment(2, 1.0, 2.0, top + 0.3);
  CHECK(s.saturated);
  CHECK(s.gamma == 1.0);
  CHECK(s.excess == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("continuous regime") {
  const RadialMeasure m = annulus_with({{2.0, 0.3}});
  const RadialSolveResult r = solve_dirichlet_radial(m, 0.0, 1.0);
  REQUIRE(r.status == SolveStatus::Unique);
  const RadialSolution& s = *r.solution;
  CHECK(s.jumps().empty());
  CHECK(s.boundary().inner_classical);
  CHECK(s.boundary().outer_classical);
  CHECK(s.value(3.0, -1) == doctest::Approx(1.0).epsilon(1e-12));
  const auto g = s.gammas();
  CHECK(g[1] - g[0] == doctest::Approx(0.3 * 2).epsilon(1e-14));
  CHECK(r.L_hat == doctest::Approx(0.2));
}

TEST_CASE("jump regime reproduces the one-sphere solution") {
  const RadialMeasure m = annulus_with({{2.0, 0.8}});
  const RadialSolveResult r = solve_dirichlet_radial(m, 0.0, phi_b_jump);
  REQUIRE(r.status == SolveStatus::Unique);
  const RadialSolution& s = *r.solution;
  CHECK(s.gammas()[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s.gammas()[1] == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(s.jumps().size() == 1);
  CHECK(s.jumps()[0].radius == 2.0);
  CHECK(s.jumps()[0].direction == 1);
  // 0.290252 is rounded in the sixth place, so the recovered height is too
  CHECK(std::abs(s.jumps()[0].height - J) < 2e-6);
  const TraceLimits t = evaluate_T(s, 2.0);
  CHECK(t.outer == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.inner == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(evaluate_T(s, 1.0).outer == doctest::Approx(0.4).epsilon(1e-12));

  // mirror image
  const RadialSolveResult d = solve_dirichlet_radial(annulus_with({{2.0, -0.8}}), 0.0, -phi_b_jump);
  REQUIRE(d.solution);
  CHECK(d.solution->jumps()[0].direction == -1);
  CHECK(energy_radial(*d.solution, annulus_with({{2.0, -0.8}})) == doctest::Approx(energy_radial(s, m)).epsilon(1e-12));
}

TEST_CASE("T is bounded and saturated on jump spheres") {
  const RadialMeasure m = annulus_with({{2.0, 0.8}});
  const RadialSolution s = *solve_dirichlet_radial(m, 0.0, phi_b_jump).solution;
  for (int k = 0; k <= 400; ++k) {
    const double r = 1.0 + 2.0 * k / 400;
    const TraceLimits t = evaluate_T(s, r);
    CHECK(std::abs(t.inner) <= 1.0 + 1e-15);
    CHECK(std::abs(t.outer) <= 1.0 + 1e-15);
  }
}

TEST_CASE("zero measure and boundary jumps") {
  const RadialMeasure m = annulus_with({});
  const RadialSolveResult flat = solve_dirichlet_radial(m, 0.0, 0.0);
  REQUIRE(flat.solution);
  CHECK(flat.solution->gammas()[0] == 0.0);
  CHECK(energy_radial(*flat.solution, m) == doctest::Approx(16 * pi).epsilon(1e-14));

  // data beyond the catenoid range: the excess is paid at r_a
  const RadialSolveResult big = solve_dirichlet_radial(m, 0.0, 3.0);
  REQUIRE(big.solution);
  const BoundaryAttainment& b = big.solution->boundary();
  CHECK_FALSE(b.inner_classical);
  CHECK(b.outer_classical);
  CHECK(b.inner_jump == doctest::Approx(3.0 - std::acosh(3.0)).epsilon(1e-10));
  CHECK(big.increment_high == doctest::Approx(std::acosh(3.0)).epsilon(1e-10));

  // z_phi with phi = c outside: |B| + c (2 pi r_a + 2 pi r_b)
  const std::vector<double> grid = radial_grid(m.domain, 0.1);
  const RadialProfile zero(m.domain, grid, std::vector<double>(grid.size(), 0.0));
  CHECK(energy_radial(zero, m, 0.7, 0.7) == doctest::Approx(16 * pi + 0.7 * (2 * pi + 6 * pi)).epsilon(1e-13));
}

TEST_CASE("infeasible measure") {
  const RadialSolveResult r = solve_dirichlet_radial(annulus_with({{2.0, 1.6}}), 0.0, 1.0);
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK_FALSE(r.solution.has_value());
  CHECK(r.diagnostic.find("r=2") != std::string::npos);
}

TEST_CASE("two-sphere family has constant energy") {
  const RadialMeasure m = two_spheres();
  const double C = solve_dirichlet_radial(m, 0.0, 0.0).increment_high;
  const RadialSolveResult r = solve_dirichlet_radial(m, 0.0, C + 0.5);
  REQUIRE(r.status == SolveStatus::Family);
  REQUIRE(r.family);
  const SolutionFamily& f = *r.family;
  CHECK(f.locations().size() == 2);
  CHECK(f.deficit() == doctest::Approx(0.5).epsilon(1e-10));
  const std::vector<double> grid = radial_grid(m.domain, 1e-2, {2.0, 3.0});
  const RadialSolution first = f.member(0.0);
  const double e0 = energy_radial(first, m);
  const RadialProfile u0 = first.sample(grid);
  for (int k = 1; k <= 8; ++k) {
    const RadialSolution s = f.member(f.deficit() * k / 8);
    CHECK(energy_radial(s, m) == doctest::Approx(e0).epsilon(1e-10));
    const RadialProfile u = s.sample(grid);
    CHECK(u.trace_inner() == u0.trace_inner());
    CHECK(u.trace_outer() == doctest::Approx(u0.trace_outer()).epsilon(1e-12));
    // members differ by a translation of the middle piece only
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double d = u.values()[j] - u0.values()[j];
      if (grid[j] < 2.0 || grid[j] > 3.0) CHECK(std::abs(d) < 1e-12);
      else if (grid[j] > 2.0 && grid[j] < 3.0) CHECK(d == doctest::Approx(f.deficit() * k / 8).epsilon(1e-10));
    }
  }
}

TEST_CASE("closed-form solution beats random competitors") {
  const RadialMeasure m = annulus_with({{2.0, 0.8}});
  const RadialSolution s = *solve_dirichlet_radial(m, 0.0, phi_b_jump).solution;
  const std::vector<double> grid = radial_grid(m.domain, 2e-3, {2.0});
  const RadialProfile u = s.sample(grid);
  const double e = energy_radial(u, m, 0.0, phi_b_jump);
  CHECK(e == doctest::Approx(energy_radial(s, m)).epsilon(1e-5));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // perturbations stay well above the O(h^2) sampling error
  auto amp = [&](double s) {
    const double x = U(rng);
    return (x < 0 ? -s : s) * (0.25 + 0.75 * std::abs(x));
  };
  int worse = 0;
  for (int c = 0; c < 200; ++c) {
    const double a1 = amp(0.2), a2 = amp(0.2), dj = amp(0.3), shift = amp(0.2);
    std::vector<double> v = u.values();
    std::vector<Jump> jumps;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double r = grid[j];
      v[j] += a1 * std::sin(pi * (r - 1)) + a2 * std::sin(3 * pi * (r - 1)) + (r > 2.0 ? dj : 0.0) + shift;
    }
    const std::size_t node = snap_to_grid(grid, 2.0).node;
    const double outer = u.outer(node) + a1 * std::sin(pi) + a2 * std::sin(3 * pi) + dj + shift;
    if (outer != v[node]) jumps.push_back(make_jump(grid, 2.0, v[node], outer));
    const RadialProfile w(m.domain, grid, v, jumps);
    if (energy_radial(w, m, 0.0, phi_b_jump) >= e) ++worse;
  }
  CHECK(worse == 200);
}
