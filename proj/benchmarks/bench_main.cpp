#include <benchmark/benchmark.h>

#include "bregkit/entropic_transport.hpp"
#include "bregkit/fokker_planck.hpp"
#include "bregkit/functional.hpp"
#include "bregkit/inverse_scale_space.hpp"
#include "bregkit/rng.hpp"
#include "bregkit/variational.hpp"

using namespace bregkit;

namespace {

Mat random_matrix(SplitStream& rng, Index m, Index n) {
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.gaussian();
  return a;
}

void BM_BregmanDistanceL1(benchmark::State& state) {
  SplitStream rng(1, 0);
  Index n = state.range(0);
  Functional l1 = Functional::weighted_l1(Vec::Ones(n));
  Vec u = rng.gaussian_vec(n), v = rng.gaussian_vec(n);
  SubgradientPair pu = select_pair(l1, u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bregman(l1, v, pu));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BregmanDistanceL1)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ProxTV(benchmark::State& state) {
  SplitStream rng(2, 0);
  Vec y = rng.gaussian_vec(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox_tv1d(y, 0.5));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProxTV)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_SolveL1(benchmark::State& state) {
  SplitStream rng(3, 0);
  Index n = state.range(0);
  LinOp k(random_matrix(rng, n / 2, n));
  Vec f = rng.gaussian_vec(n / 2);
  Functional l1 = Functional::weighted_l1(Vec::Ones(n));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(RegProblem{k, f, 0.5, l1}, 1e-10));
  }
}
BENCHMARK(BM_SolveL1)->Arg(32)->Arg(128);

void BM_SinkhornSweeps(benchmark::State& state) {
  SplitStream rng(4, 0);
  Index n = state.range(0);
  Mat c(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) c(i, j) = rng.uniform();
  DiscreteMeasure uni{Vec::Constant(n, 1.0 / n)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sinkhorn(uni, uni, c, 0.1, 1e-8, 100000));
  }
}
BENCHMARK(BM_SinkhornSweeps)->Arg(16)->Arg(64);

void BM_FokkerPlanckStep(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Grid1D ring{1.0, n, Topology::Periodic};
  FPProblem prob = FPProblem::constant_force(ring, 1.0);
  Vec init(n);
  for (int i = 0; i < n; ++i) init[i] = 1.0 + 0.1 * std::sin(2.0 * M_PI * (i + 0.5) / n);
  GridFunction u0{ring, init / (init.sum() * ring.h())};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(prob, u0, 1e-4, 1e-2));
  }
}
BENCHMARK(BM_FokkerPlanckStep)->Arg(64)->Arg(256);

void BM_ISSSolve(benchmark::State& state) {
  SplitStream rng(5, 0);
  Mat a = random_matrix(rng, 10, 25) / std::sqrt(10.0);
  Vec u_star = Vec::Zero(25);
  u_star[2] = 1.5;
  u_star[11] = -2.0;
  u_star[20] = 1.0;
  LinOp k(a);
  Vec f = k.apply(u_star);
  for (auto _ : state) {
    benchmark::DoNotOptimize(iss_solve(k, f, 400));
  }
}
BENCHMARK(BM_ISSSolve);

}  // namespace

BENCHMARK_MAIN();
