#include <doctest.h>

#include "pmcm/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <random>

using namespace pmcm::kernels;

namespace {

PairScanInput random_scan(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  PairScanInput in;
  double x = 1.0, mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    x += 0.01 + 0.02 * (U(rng) + 1);
    const double jump = U(rng) < -0.8 ? U(rng) : 0.0;
    in.x.push_back(x);
    in.inner_mass.push_back(mass);
    mass += jump;
    in.outer_mass.push_back(mass);
    mass += 0.01 * U(rng);
    in.perimeter.push_back(2 * M_PI * x);
  }
  return in;
}

struct Setup {
  Grid2D g;
  std::vector<double> u, u_bar, f;
  std::vector<unsigned char> free;
  Dual2D d;
};

Setup random_setup(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Setup s;
  s.g = {nx, ny, 0.1};
  for (std::size_t k = 0; k < s.g.nodes(); ++k) {
    s.u.push_back(U(rng));
    s.u_bar.push_back(U(rng));
    s.f.push_back(0.3 * U(rng));
    s.free.push_back(U(rng) > -0.6);
  }
  for (std::size_t c = 0; c < s.g.cells(); ++c) {
    s.d.w0.push_back(0.5 * U(rng));
    s.d.wx.push_back(0.5 * U(rng));
    s.d.wy.push_back(0.5 * U(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("pair scan: parallel matches serial") {
  std::mt19937_64 rng(1);
  for (std::size_t k : {2u, 3u, 17u, 200u, 1500u}) {
    const PairScanInput in = random_scan(rng, k);
    const PairScanResult a = max_pair_ratio_serial(in), b = max_pair_ratio(in);
    CHECK(a.value == b.value);
    CHECK(a.i == b.i);
    CHECK(a.j == b.j);
    // brute-force oracle
    double best = -1.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        best = std::max(best, std::abs(in.outer_mass[j] - in.inner_mass[i]) / (in.perimeter[i] + in.perimeter[j]));
    CHECK(a.value == doctest::Approx(best).epsilon(1e-15));
  }
}

TEST_CASE("pair scan ties pick the smallest pair") {
  const PairScanInput in{{1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  for (const PairScanResult& r : {max_pair_ratio(in), max_pair_ratio_serial(in)}) {
    CHECK(r.value == 0.5);
    CHECK(r.i == 0);
    CHECK(r.j == 1);
  }
  // nothing to report on a null measure
  const PairScanResult z = max_pair_ratio(PairScanInput{{1.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}});
  CHECK(z.value == 0.0);
  CHECK(z.i == PairScanResult{}.i);
}

TEST_CASE("2D steps: parallel matches serial exactly") {
  std::mt19937_64 rng(2);
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{2, 2}, {7, 5}, {64, 80}}) {
    Setup a = random_setup(rng, nx, ny);
    Setup b = a;
    dual_step_serial(a.g, a.u_bar, 0.37, a.d);
    dual_step(b.g, b.u_bar, 0.37, b.d);
    CHECK(a.d.w0 == b.d.w0);
    CHECK(a.d.wx == b.d.wx);
    CHECK(a.d.wy == b.d.wy);
    for (std::size_t c = 0; c < a.g.cells(); ++c)
      CHECK(a.d.w0[c] * a.d.w0[c] + a.d.wx[c] * a.d.wx[c] + a.d.wy[c] * a.d.wy[c] <= 1.0 + 1e-12);
    primal_step_serial(a.g, a.d, a.f, a.free, 0.21, a.u, a.u_bar);
    primal_step(b.g, b.d, b.f, b.free, 0.21, b.u, b.u_bar);
    CHECK(a.u == b.u);
    CHECK(a.u_bar == b.u_bar);
    const double es = energy_serial(a.g, a.u, a.f, a.free), ep = energy(a.g, a.u, a.f, a.free);
    CHECK(ep == doctest::Approx(es).epsilon(1e-13));
  }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
  std::mt19937_64 rng(3);
  const Setup s = random_setup(rng, 101, 57);
  const PairScanInput in = random_scan(rng, 800);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double e1 = energy(s.g, s.u, s.f, s.free);
  const PairScanResult p1 = max_pair_ratio(in);
  omp_set_num_threads(4);
  const double e4 = energy(s.g, s.u, s.f, s.free);
  const PairScanResult p4 = max_pair_ratio(in);
  omp_set_num_threads(saved);
  CHECK(e1 == e4);
  CHECK(p1.value == p4.value);
  CHECK(p1.i == p4.i);
  CHECK(p1.j == p4.j);
}
