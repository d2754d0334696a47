#include <benchmark/benchmark.h>

#include "ldrift/evolution.hpp"
#include "ldrift/lorentz.hpp"

using namespace ldrift;

namespace {

GridFunction noise(const BoxDomain& d, std::uint64_t seed) { return initial_state(d, "random", 1.0, seed); }

void BM_Resolve(benchmark::State& state) {
  const auto d = BoxDomain::cube(2, 1.0, static_cast<int>(state.range(0)));
  const auto data = make_model("lipschitz-nonlinear", d, ModelParams{});
  const auto op = TruncatedOperator::full(data, 0.0);
  ResolventConfig rc;
  rc.lambda = 0.01;
  const ShiftedLaplacian pre(d, 1.0, rc.lambda);
  const auto g = noise(d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(resolve(op, g, rc, nullptr, &pre));
}
BENCHMARK(BM_Resolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ResolveNewtonDrift(benchmark::State& state) {
  const auto d = BoxDomain::cube(3, 1.0, static_cast<int>(state.range(0)));
  const auto data = make_model("singular-drift", d, ModelParams{});
  const auto op = TruncatedOperator::full(data, 0.0);
  ResolventConfig rc;
  rc.lambda = 0.01;
  rc.method = SolverMethod::newton;
  const auto g = noise(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(resolve(op, g, rc));
}
BENCHMARK(BM_ResolveNewtonDrift)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  const auto d = BoxDomain::cube(2, 1.0, static_cast<int>(state.range(0)));
  const auto data = make_model("heat", d, ModelParams{});
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.truncation = default_truncation_plan(data);
  const ShiftedLaplacian pre(d, 1.0, cfg.dt);
  for (auto _ : state) benchmark::DoNotOptimize(step(data.initial, 0.0, cfg, data, 1.0, &pre));
}
BENCHMARK(BM_Step)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Poincare(benchmark::State& state) {
  const auto d = BoxDomain::cube(2, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(poincare(d, 1e-12));
}
BENCHMARK(BM_Poincare)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LorentzNorm(benchmark::State& state) {
  const auto d = BoxDomain::cube(3, 1.0, static_cast<int>(state.range(0)));
  const auto u = noise(d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(lorentz_norm(u, LorentzExponents(3.0, 2.0)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(u.size()));
}
BENCHMARK(BM_LorentzNorm)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
