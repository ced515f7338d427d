// Serial reference vs OpenMP kernels. Compare BM_*<Serial> against BM_*<Parallel>
// at the same size; the thread count follows OMP_NUM_THREADS.
#include "pmcm/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace pmcm::kernels;

namespace {

constexpr bool Serial = false;
constexpr bool Parallel = true;

PairScanInput pair_input(std::size_t k) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  PairScanInput in;
  double inner = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = 1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(k);
    in.x.push_back(r);
    inner += U(rng);
    outer = inner + 0.1 * U(rng);
    in.inner_mass.push_back(inner);
    in.outer_mass.push_back(outer);
    in.perimeter.push_back(2 * M_PI * r);
  }
  return in;
}

struct Field2D {
  Grid2D g;
  std::vector<double> u, u_bar, f;
  std::vector<unsigned char> free;
  Dual2D d;

  explicit Field2D(std::size_t n) {
    g = {n, n, 1.0 / static_cast<double>(n - 1)};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    u.resize(g.nodes());
    f.resize(g.nodes());
    free.assign(g.nodes(), 1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        u[g.node(i, j)] = U(rng);
        f[g.node(i, j)] = 0.1 * U(rng);
        if (i == 0 || j == 0 || i == n - 1 || j == n - 1) free[g.node(i, j)] = 0;
      }
    u_bar = u;
    d.w0.assign(g.cells(), 0.0);
    d.wx.assign(g.cells(), 0.0);
    d.wy.assign(g.cells(), 0.0);
  }
};

template <bool Par>
void BM_PairScan(benchmark::State& st) {
  const PairScanInput in = pair_input(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Par ? max_pair_ratio(in) : max_pair_ratio_serial(in));
}

template <bool Par>
void BM_DualStep(benchmark::State& st) {
  Field2D s(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if (Par)
      dual_step(s.g, s.u_bar, 0.1, s.d);
    else
      dual_step_serial(s.g, s.u_bar, 0.1, s.d);
    benchmark::ClobberMemory();
  }
}

template <bool Par>
void BM_PrimalStep(benchmark::State& st) {
  Field2D s(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    if (Par)
      primal_step(s.g, s.d, s.f, s.free, 1e-3, s.u, s.u_bar);
    else
      primal_step_serial(s.g, s.d, s.f, s.free, 1e-3, s.u, s.u_bar);
    benchmark::ClobberMemory();
  }
}

template <bool Par>
void BM_Energy(benchmark::State& st) {
  Field2D s(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Par ? energy(s.g, s.u, s.f, s.free) : energy_serial(s.g, s.u, s.f, s.free));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_PairScan, Serial)->Arg(512)->Arg(2048);
BENCHMARK_TEMPLATE(BM_PairScan, Parallel)->Arg(512)->Arg(2048);
BENCHMARK_TEMPLATE(BM_DualStep, Serial)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_DualStep, Parallel)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_PrimalStep, Serial)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_PrimalStep, Parallel)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_Energy, Serial)->Arg(256)->Arg(1024);
BENCHMARK_TEMPLATE(BM_Energy, Parallel)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
