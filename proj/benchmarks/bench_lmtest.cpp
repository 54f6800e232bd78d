#include <benchmark/benchmark.h>

#include <cmath>

#include "lmtest/critical.hpp"
#include "lmtest/lower_bounds.hpp"
#include "lmtest/lpt.hpp"
#include "lmtest/sim.hpp"
#include "lmtest/widths.hpp"

using namespace lmtest;

namespace {

Vector general_theta(std::size_t d) {
  Vector t(d, 0.0);
  t[0] = 0.5;
  t[1] = 0.2;
  t[4] = 0.05;
  return t;
}

}  // namespace

static void BM_SolveUpperZero(benchmark::State& state) {
  const std::size_t d = state.range(0);
  const LocalizedEllipse loc(generate_poly(d, 1.0), Vector(d, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eps_upper(loc, 1e-3, 0.25));
}
BENCHMARK(BM_SolveUpperZero)->Arg(1000)->Arg(100000);

static void BM_SolveUpperGeneral(benchmark::State& state) {
  const std::size_t d = state.range(0);
  const LocalizedEllipse loc(generate_poly(d, 1.0), general_theta(d));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eps_upper(loc, 1e-3, 0.25));
}
BENCHMARK(BM_SolveUpperGeneral)->Arg(1000)->Arg(100000);

static void BM_SolveLowerGeneral(benchmark::State& state) {
  const std::size_t d = state.range(0);
  const LocalizedEllipse loc(generate_poly(d, 1.0), general_theta(d));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eps_lower(loc, 1e-3));
}
BENCHMARK(BM_SolveLowerGeneral)->Arg(1000)->Arg(100000);

static void BM_TStar(benchmark::State& state) {
  const auto e = generate_poly(100000, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(t_star(e, 1, 1e-3, 0.25));
}
BENCHMARK(BM_TStar);

static void BM_DualBound(benchmark::State& state) {
  const std::size_t d = state.range(0);
  const auto e = generate_poly(d, 1.0);
  const Vector t = general_theta(d);
  for (auto _ : state) benchmark::DoNotOptimize(coordinate_tail_dual_bound(e, t, 0.1, 10));
}
BENCHMARK(BM_DualBound)->Arg(100)->Arg(10000);

static void BM_BruteForceWidth(benchmark::State& state) {
  const auto e = generate_poly(8, 1.0);
  const Vector t = general_theta(8);
  BruteForceOptions opt;
  opt.n_dirs = 2000;
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_width_detail(e, t, 0.2, 4, opt));
}
BENCHMARK(BM_BruteForceWidth)->Unit(benchmark::kMillisecond);

static void BM_EstimateErrors(benchmark::State& state) {
  const auto e = generate_poly(200, 1.0);
  const TestProblem p(e, Vector(200, 0.0), 0.05, 0.25);
  const auto built = build_test(p);
  const auto alt = worst_case_alternative(e, p.theta_star(), built.upper.eps, built.test.coords);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_errors(built.test, alt.theta, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateErrors)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_WorstCaseAlternative(benchmark::State& state) {
  const auto e = generate_poly(200, 1.0);
  const Vector t = general_theta(200);
  const std::size_t k = k_upper(e, t, 0.2);
  const auto test = make_test(t, 0.05, 0.25, k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(worst_case_alternative(e, t, 0.2, test.coords));
  }
}
BENCHMARK(BM_WorstCaseAlternative)->Unit(benchmark::kMillisecond);

static void BM_EmpiricalChi2(benchmark::State& state) {
  const std::size_t k = state.range(0);
  const EllipseSpec e(Vector(k, double(k)));
  const double sigma = 0.1;
  const double eps = std::sqrt(std::sqrt(double(k)) * sigma * sigma / 4.0);
  const auto prior = hypercube_prior(e, Vector(k, 0.0), eps, k);
  for (auto _ : state) benchmark::DoNotOptimize(chi2_bound_empirical(prior, sigma, 10000, 1));
}
BENCHMARK(BM_EmpiricalChi2)->Arg(64)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_SigmaSweep(benchmark::State& state) {
  const auto e = generate_poly(100000, 1.0);
  const Vector z(e.dim(), 0.0);
  const auto grid = log_grid(1e-3, 3e-2, 10);
  for (auto _ : state) benchmark::DoNotOptimize(sigma_sweep(e, z, grid, 0.25));
}
BENCHMARK(BM_SigmaSweep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
