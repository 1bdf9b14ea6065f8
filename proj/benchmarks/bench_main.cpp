#include <benchmark/benchmark.h>

#include <helistab/dns.hpp>
#include <helistab/propagator.hpp>
#include <helistab/pseudospectrum.hpp>
#include <helistab/transform.hpp>

using namespace helistab;

namespace {

void BM_SmallestSingular(benchmark::State& state) {
  const int M = int(state.range(0));
  const OperatorMatrix L = assemble_L(ModeParams::make(1e-4, 2, 1, 0), M);
  const auto backend = state.range(1) ? SingularBackend::banded : SingularBackend::dense;
  for (auto _ : state) benchmark::DoNotOptimize(smallest_singular(L, 0.3, backend));
}
BENCHMARK(BM_SmallestSingular)->ArgsProduct({{32, 64, 128, 256}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_PsiBound(benchmark::State& state) {
  const OperatorMatrix H = assemble_H(ModeParams::make(1e-3, 2, 1, 0), int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(psi_bound(H).psi);
}
BENCHMARK(BM_PsiBound)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SemigroupNorm(benchmark::State& state) {
  const OperatorMatrix L = assemble_L(ModeParams::make(1e-3, 2, 1, 0), int(state.range(0)));
  const double t[] = {50.0};
  for (auto _ : state) benchmark::DoNotOptimize(semigroup_norm(L, t));
}
BENCHMARK(BM_SemigroupNorm)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RoundTripFFT(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const TorusGrid g(n, n, n, 2.0);
  SpectralTransform fft(g);
  SpectralField f = init_random(g, 1.0, 1).component_field(0);
  std::vector<double> phys(g.points());
  for (auto _ : state) {
    fft.to_physical(f, 0, phys);
    fft.to_spectral(phys, f, 0);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.points()));
}
BENCHMARK(BM_RoundTripFFT)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_DnsStep(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const TorusGrid g(n, n, n, 2.0);
  PerturbationSolver solver(g, 1e-3);
  SpectralField V = init_random(g, 1e-4, 1);
  const double dt = cfl_dt(solver, 0);
  solver.step(V, dt);  // builds the exponential blocks outside the timed loop
  for (auto _ : state) solver.step(V, dt);
}
BENCHMARK(BM_DnsStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EvolveMode(benchmark::State& state) {
  const ModeParams p = ModeParams::make(1e-3, 2, 1, 0);
  const int M = int(state.range(0));
  EvolveOptions o;
  o.trunc = M;
  o.sample_every = 100;
  const Eigen::VectorXcd u0 = smooth_mode_data(M, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_mode(p, u0, 25.0, max_mode_dt(p, M), o).u.size());
}
BENCHMARK(BM_EvolveMode)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
