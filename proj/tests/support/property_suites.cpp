#include "property_suites.hpp"

#include "pmcm/approximation.hpp"
#include "pmcm/certificates.hpp"
#include "pmcm/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace pmcm::testing {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

RadialDomain random_domain(std::mt19937_64& rng) {
  RadialDomain d;
  d.n = uniform_int(rng, 2, 3);
  d.r_a = uniform(rng, 0.5, 2.0);
  d.r_b = d.r_a + uniform(rng, 0.5, 3.0);
  d.R_B = d.r_b + 1.0;
  return d;
}

std::vector<double> random_grid(std::mt19937_64& rng, const RadialDomain& d, int nodes) {
  // jittered uniform nodes keep cells within a factor of three of each other
  std::vector<double> g(static_cast<std::size_t>(nodes));
  const double h = (d.r_b - d.r_a) / (nodes - 1);
  for (int j = 0; j < nodes; ++j) g[j] = d.r_a + h * j;
  for (int j = 1; j + 1 < nodes; ++j) g[j] += uniform(rng, -0.33, 0.33) * h;
  return g;
}

// source nodes plus a uniform subdivision into about `points` cells
std::vector<double> subdivide(const std::vector<double>& g, int points) {
  const double step = (g.back() - g.front()) / points;
  std::vector<double> out{g.front()};
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const int pieces = std::max(1, static_cast<int>(std::ceil((g[i + 1] - g[i]) / step)));
    for (int k = 1; k < pieces; ++k) out.push_back(g[i] + (g[i + 1] - g[i]) * k / pieces);
    out.push_back(g[i + 1]);
  }
  return out;
}

void note(SuiteResult& out, double excess, const std::string& what) {
  out.worst = std::max(out.worst, excess);
  if (excess > out.budget) {
    if (out.violations == 0) out.first_failure = what;
    ++out.violations;
  }
}

}  // namespace

RadialProfile random_profile(std::mt19937_64& rng, const ProfileShape& shape) {
  const RadialDomain d = random_domain(rng);
  const int nodes = uniform_int(rng, shape.min_nodes, shape.max_nodes);
  const std::vector<double> g = random_grid(rng, d, nodes);
  std::vector<double> v(g.size());
  for (double& x : v) x = uniform(rng, -shape.value_range, shape.value_range);
  std::vector<Jump> jumps;
  const int k = uniform_int(rng, 0, std::min(shape.max_jumps, nodes - 2));
  std::vector<int> at;
  for (int j = 1; j + 1 < nodes; ++j) at.push_back(j);
  std::shuffle(at.begin(), at.end(), rng);
  at.resize(static_cast<std::size_t>(k));
  std::sort(at.begin(), at.end());
  for (int j : at) {
    double outer = uniform(rng, -shape.value_range, shape.value_range);
    if (outer == v[j]) outer += 0.5;
    jumps.push_back(make_jump(g, g[j], v[j], outer));
  }
  return RadialProfile(d, g, v, jumps);
}

SuiteResult area_sandwich_suite(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  SuiteResult out;
  // pointwise the bounds are exact; only summation rounding is allowed
  for (std::size_t c = 0; c < cases; ++c) {
    ProfileShape shape;
    shape.value_range = uniform(rng, 0.01, 50.0);
    const RadialProfile p = random_profile(rng, shape);
    const double area = area_functional(p);
    const double mid = discrete_volume(p) + total_variation(p);
    const double round = 1e-13 * mid;
    std::ostringstream os;
    os.precision(17);
    os << "case " << c << ": area " << area << ", |Omega| + TV " << mid;
    note(out, area - mid - round, os.str() + " (lower)");
    note(out, mid - std::sqrt(2.0) * area - round, os.str() + " (upper)");
    ++out.cases;
  }
  return out;
}

SuiteResult truncation_suite(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  SuiteResult out;
  for (std::size_t c = 0; c < cases; ++c) {
    const RadialProfile p = random_profile(rng);
    const double k = uniform(rng, 0.05, 2.5);
    const RadialProfile t = truncate(p, k);
    for (const Jump& j : p.jumps()) {
      const double lam = uniform_int(rng, 0, 3) == 0 ? 0.5 : uniform(rng, 0.0, 1.0);
      const Jump* tj = t.jump_at(j.node);
      const double tk = tj ? lambda_representative(tj->u_plus, tj->u_minus, lam) : t.inner(j.node);
      std::ostringstream os;
      os.precision(17);
      os << "case " << c << " node " << j.node << ": u+ " << j.u_plus << ", u- " << j.u_minus << ", k " << k
         << ", lambda " << lam << ", T_k(u)^lambda " << tk;
      // the second branch of the bound is attained when u- <= 0 <= u+; allow rounding only
      const double round = 1e-14 * (std::abs(j.u_plus) + std::abs(j.u_minus));
      note(out, std::abs(tk) - m_bound(j.u_plus, j.u_minus, lam) - round, os.str() + " exceeds M[u, lambda]");
      if (-k <= j.u_minus && j.u_plus <= k) {
        const double before = lambda_representative(j.u_plus, j.u_minus, lam);
        note(out, std::abs(tk - before), os.str() + " differs from u^lambda");
      }
    }
    ++out.cases;
  }
  return out;
}

SuiteResult pairing_suite(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  SuiteResult out;
  double budget_used = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const RadialProfile u = random_profile(rng);
    const RadialDomain& d = u.domain();
    const auto& g = u.grid();
    RadialField F{d, g, std::vector<double>(u.cells())};
    for (std::size_t i = 0; i < u.cells(); ++i) {
      const double q = ipow(g[i], d.n - 1);
      F.flux[i] = uniform(rng, -0.999, 0.999) * q;
    }
    // div F is carried by the interior nodes
    RadialMeasure m;
    m.domain = d;
    for (std::size_t j = 1; j + 1 < u.nodes(); ++j)
      m.atoms.push_back({g[j], (F.flux[j] - F.flux[j - 1]) / ipow(g[j], d.n - 1)});
    const PairingBalance pb = pairing_balance(u, F, m, hahn_lambda(m));
    double h = 0.0;
    for (std::size_t i = 0; i < u.cells(); ++i) h = std::max(h, u.cell_width(i));
    const double budget = h * pb.area * 1e-3;
    const double excess = std::abs(pb.pairing) - (pb.area - pb.conjugate);
    budget_used = std::max(budget_used, excess / budget);
    if (excess > budget) {
      std::ostringstream os;
      os.precision(17);
      os << "case " << c << ": |pairing| " << std::abs(pb.pairing) << " > area - conjugate "
         << pb.area - pb.conjugate << " + budget " << budget;
      if (out.violations == 0) out.first_failure = os.str();
      ++out.violations;
    }
    out.worst = std::max(out.worst, excess);
    ++out.cases;
  }
  // reported as the largest fraction of the per-case budget actually used
  out.budget = budget_used;
  return out;
}

SuiteResult smoothing_suite(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  SuiteResult out;
  for (std::size_t c = 0; c < cases; ++c) {
    ProfileShape shape;
    shape.max_nodes = 8;
    shape.max_jumps = 2;
    const RadialProfile p = random_profile(rng, shape);
    const double eps = uniform(rng, 0.05, 1.0);
    const SmoothedProfile s(p, eps);
    const RadialProfile us = s.sample(subdivide(p.grid(), 2000));
    const double tv = total_variation(p), area = area_functional(p), sup = p.sup_abs();
    std::ostringstream os;
    os.precision(17);
    os << "case " << c << ", eps " << eps << ": ";
    note(out, total_variation(us) - tv - 4.0 * eps, os.str() + "TV grew by more than 4 eps");
    note(out, area_functional(us) - area - 4.0 * eps, os.str() + "area grew by more than 4 eps");
    note(out, us.sup_abs() - (1.0 + eps) * sup, os.str() + "sup grew by more than a factor 1 + eps");
    ++out.cases;
  }
  return out;
}

}  // namespace pmcm::testing
