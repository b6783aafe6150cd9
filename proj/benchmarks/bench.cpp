#include <benchmark/benchmark.h>

#include "sqfilter/fock.hpp"
#include "sqfilter/het1.hpp"
#include "sqfilter/het2.hpp"
#include "sqfilter/runner.hpp"

using namespace sqf;

namespace {

ModelParams model(Scheme scheme) {
  return {1.0, 0.1, scheme == Scheme::SingleHeterodyne ? kPi / 2 : 0.0, 0.05, scheme};
}

void BM_het2_solve(benchmark::State& state) {
  const TimeGrid grid(10.0, 1e-3);
  const auto path = generate_path(grid, NoiseKind::Complex, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        het2::solve(path, model(Scheme::DoubleHeterodyne), SqueezeParam(0.5, 0.0), 0.5));
  state.SetItemsProcessed(state.iterations() * grid.n_steps());
}
BENCHMARK(BM_het2_solve);

void BM_het1_solve(benchmark::State& state) {
  const TimeGrid grid(10.0, 1e-3);
  const auto path = generate_path(grid, NoiseKind::Real, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        het1::solve(path, model(Scheme::SingleHeterodyne), SqueezeParam(0.5, 0.0), 0.5));
  state.SetItemsProcessed(state.iterations() * grid.n_steps());
}
BENCHMARK(BM_het1_solve);

void BM_fock_sde_step(benchmark::State& state) {
  const int cutoff = static_cast<int>(state.range(0));
  auto psi = fock::build_squeezed_coherent(SqueezeParam(0.5, 0.0), 0.5, cutoff);
  const auto p = model(Scheme::DoubleHeterodyne);
  for (auto _ : state) {
    fock::sde_step(psi, cplx{1e-3, -1e-3}, 1e-4, 0.0, p);
    psi.amplitudes /= std::sqrt(psi.norm2());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_fock_sde_step)->Arg(32)->Arg(64)->Arg(128);

void BM_ensemble(benchmark::State& state) {
  RunConfig c;
  c.mu = 1.0;
  c.t_max = 1.0;
  c.dt = 1e-3;
  c.trajectories = 256;
  c.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(c));
  state.SetItemsProcessed(state.iterations() * c.trajectories);
}
BENCHMARK(BM_ensemble)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
