#include <doctest.h>

#include "pmcm/certificates.hpp"
#include "pmcm/minimizer.hpp"
#include "pmcm/radial_solver.hpp"

#include <cmath>

using namespace pmcm;

namespace {

RadialMeasure annulus_with(std::vector<Atom> atoms) {
  RadialMeasure m;
  m.domain = {2, 1.0, 3.0, 4.0};
  m.atoms = std::move(atoms);
  return m;
}

const double phi_b_jump = 0.290252 + 0.5 + 1.924847;

struct Analytic {
  RadialMeasure m = annulus_with({{2.0, 0.8}});
  RadialSolution sol;
  std::vector<double> grid;
  RadialProfile u;
  RadialField T;
  HahnSplit lam;
  explicit Analytic(double h) {
    sol = *solve_dirichlet_radial(m, 0.0, phi_b_jump).solution;
    grid = radial_grid(m.domain, h, {2.0});
    u = sol.sample(grid);
    T = sol.field(grid);
    lam = hahn_lambda(m);
  }
};

}  // namespace

TEST_CASE("jump trace residual is the defect mass on the jump set") {
  const Analytic a(1e-2);
  REQUIRE(a.u.jumps().size() == 1);
  const double height = a.u.jumps()[0].height();
  const TFormulaResult r = check_T_formula(a.u, a.T.scaled(0.9), a.m, a.lam, 1e-8);
  CHECK(r.jump_trace_residual == doctest::Approx(4 * M_PI * height * 0.1).epsilon(1e-12));
  CHECK_FALSE(r.pass);
}

TEST_CASE("analytic one-sphere solution passes every condition") {
  const Analytic a(1e-2);
  const CertificateReport r = verify_weak_solution(a.u, a.T, a.m, a.lam, 1e-8);
  CHECK(r.sup_norm_T <= 1.0);
  CHECK(r.div_residual < 1e-8);
  CHECK(r.pairing_residual < 1e-8);
  CHECK(r.t_formula_residual < 1e-8);
  CHECK(r.jump_trace_residual < 1e-8);
  CHECK(r.pass());
  CHECK(r.failed_conditions().empty());
  const nlohmann::json j = r.to_json();
  for (const char* c : {"bound", "pairing", "divergence", "t_formula"}) CHECK(j.at("conditions").contains(c));
}

TEST_CASE("zero data give exact zeros") {
  const RadialMeasure m = annulus_with({});
  const std::vector<double> g = radial_grid(m.domain, 0.1);
  const RadialProfile u(m.domain, g, std::vector<double>(g.size(), 0.0));
  const RadialField T{m.domain, g, std::vector<double>(g.size() - 1, 0.0)};
  const CertificateReport r = verify_weak_solution(u, T, m, hahn_lambda(m), 1e-12);
  CHECK(r.sup_norm_T == 0.0);
  CHECK(r.div_residual == 0.0);
  CHECK(r.pairing_residual == 0.0);
  CHECK(r.t_formula_residual == 0.0);
  CHECK(r.pass());
}

TEST_CASE("scaled field is caught") {
  const Analytic a(1e-2);
  const CertificateReport r = verify_weak_solution(a.u, a.T.scaled(1.1), a.m, a.lam, 1e-8);
  CHECK(r.sup_norm_T == doctest::Approx(1.1));
  CHECK_FALSE(r.pass_bound);
  CHECK(r.div_residual > 1e-3);
  CHECK_FALSE(r.pass_divergence);
  CHECK(r.failed_conditions().find("bound") != std::string::npos);
}

TEST_CASE("T formula on the analytic solution and on u = r") {
  const Analytic a(1e-2);
  const TFormulaResult t = check_T_formula(a.u, a.T, a.m, a.lam, 1e-8);
  CHECK(t.pass);
  CHECK(a.T.trace_right(snap_to_grid(a.grid, 2.0).node) == doctest::Approx(1.0).epsilon(1e-14));

  const RadialMeasure zero = annulus_with({});
  const std::vector<double> g0{1.0, 2.0, 3.0};
  const RadialProfile flat(zero.domain, g0, {0.0, 0.0, 0.0});
  CHECK(check_T_formula(flat, RadialField{zero.domain, g0, {0.0, 0.0}}, 1e-14).residual == 0.0);

  // u = r: T = 1/sqrt(2) pointwise; a per-cell flux read at the midpoint converges at second order
  std::vector<double> errs;
  for (double h : {0.1, 0.05, 0.025}) {
    const std::vector<double> g = radial_grid(zero.domain, h);
    const RadialProfile u(zero.domain, g, g);
    RadialField T{zero.domain, g, {}};
    for (std::size_t i = 0; i + 1 < g.size(); ++i) T.flux.push_back(0.5 * (g[i] + g[i + 1]) / std::sqrt(2.0));
    CHECK(T.midpoint(0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    errs.push_back(check_T_formula(u, T, 1.0).residual);
  }
  CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("divergence residual sees each atom exactly") {
  const Analytic a(5e-2);
  CHECK(divergence_residual(a.T, a.m) < 1e-12);
  RadialMeasure heavier = a.m;
  heavier.atoms[0].weight = 0.9;
  CHECK(divergence_residual(a.T, heavier) > 1e-3);
}

TEST_CASE("pairing balance on the analytic solution") {
  const Analytic a(1e-2);
  const PairingBalance p = pairing_balance(a.u, a.T, a.m, a.lam);
  CHECK(std::abs(p.defect()) < 1e-8);
  CHECK(p.tv_distance < 1e-8);
  CHECK(p.area > p.conjugate);
}

TEST_CASE("midpoint test") {
  const Analytic a(1e-2);
  const MidpointVerdict same = midpoint_uniqueness_test(a.u, a.T, a.T, a.m, a.lam, 1e-8);
  CHECK_FALSE(same.refused);
  CHECK(same.consistent);
  CHECK(same.slack == doctest::Approx(0.0).scale(1.0));

  // a constant flux shift is divergence free
  RadialField wiggle = a.T;
  for (double& f : wiggle.flux) f -= 0.1;
  CHECK(divergence_residual(wiggle, a.m) < 1e-12);
  const MidpointVerdict w = midpoint_uniqueness_test(a.u, a.T, wiggle, a.m, a.lam, 1e-8);
  CHECK_FALSE(w.refused);
  CHECK(w.slack > 1e-4);
  CHECK_FALSE(w.consistent);
  CHECK(w.defect2 > w.defect1);

  const MidpointVerdict bad = midpoint_uniqueness_test(a.u, a.T, a.T.scaled(1.1), a.m, a.lam, 1e-8);
  CHECK(bad.refused);
  CHECK_FALSE(bad.reason.empty());
}

TEST_CASE("maximum principle comparator") {
  const RadialMeasure zero = annulus_with({});
  const std::vector<double> g = radial_grid(zero.domain, 0.1);
  const RadialProfile one(zero.domain, g, std::vector<double>(g.size(), 1.0));
  const RadialProfile nil(zero.domain, g, std::vector<double>(g.size(), 0.0));
  const MaxPrincipleVerdict v = compare_max_principle(one, nil, zero, zero, 1e-12);
  CHECK_FALSE(v.refused);
  CHECK(v.holds);
  CHECK(v.worst_violation == doctest::Approx(1.0));

  const MaxPrincipleVerdict swapped = compare_max_principle(nil, one, zero, zero, 1e-12);
  CHECK(swapped.refused);  // traces not ordered

  // jump family members: continuity fails
  RadialMeasure two;
  two.domain = {2, 1.0, 4.0, 5.0};
  two.atoms = {{2.0, 0.8}, {3.0, 1.0 / 3}};
  const double C = solve_dirichlet_radial(two, 0.0, 0.0).increment_high;
  const SolutionFamily f = *solve_dirichlet_radial(two, 0.0, C + 0.5).family;
  const std::vector<double> g2 = radial_grid(two.domain, 1e-2, {2.0, 3.0});
  const MaxPrincipleVerdict fam = compare_max_principle(f.member(0.0).sample(g2), f.member(0.5).sample(g2), two, two, 1e-6);
  CHECK(fam.refused);
  CHECK(fam.failed_hypothesis.find("continu") != std::string::npos);

  // unordered measures
  RadialMeasure lo = annulus_with({{2.0, 0.3}}), hi = annulus_with({{2.0, 0.1}});
  const std::vector<double> g3 = radial_grid(lo.domain, 0.1, {2.0});
  const RadialProfile a(lo.domain, g3, std::vector<double>(g3.size(), 1.0));
  const RadialProfile b(lo.domain, g3, std::vector<double>(g3.size(), 0.0));
  CHECK(compare_max_principle(a, b, lo, hi, 1e-6).refused);
  CHECK_FALSE(compare_max_principle(a, b, hi, lo, 1e-6).refused);
}

TEST_CASE("minimizer output certifies within max(1e-4, 10 gap)") {
  const RadialMeasure m = annulus_with({{2.0, 0.3}});
  MinimizeOptions o;
  o.tol_gap = 1e-8;
  const RadialMinimizer r = minimize(make_radial_problem(m, 0.0, 1.0, 1e-2), o);
  REQUIRE(r.report.converged);
  const double tol = std::max(1e-4, 10 * r.report.gap);
  const CertificateReport c = verify_weak_solution(r.u, r.T, m, hahn_lambda(m), tol);
  CHECK(c.pass());
}
