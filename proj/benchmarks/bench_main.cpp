#include <benchmark/benchmark.h>

#include "laa/capacity.hpp"
#include "laa/contention.hpp"
#include "laa/optimizer.hpp"
#include "laa/simulator.hpp"

namespace {

laa::SystemParams defaults(laa::CwMode mode) {
  laa::SystemParams p;
  p.mode = mode;
  return p;
}

void BM_FixedPoint(benchmark::State& state) {
  const auto p = defaults(state.range(0) ? laa::CwMode::kVariable : laa::CwMode::kFixed);
  for (auto _ : state) benchmark::DoNotOptimize(laa::solve_fixed_point(p));
}
BENCHMARK(BM_FixedPoint)->Arg(0)->Arg(1);

void BM_ServiceModel(benchmark::State& state) {
  const auto p = defaults(laa::CwMode::kVariable);
  const auto cp = laa::solve_fixed_point(p);
  for (auto _ : state) benchmark::DoNotOptimize(laa::ServiceModel(p, cp).x_max());
}
BENCHMARK(BM_ServiceModel);

void BM_TwoState(benchmark::State& state) {
  const auto p = defaults(laa::CwMode::kFixed);
  const laa::ServiceModel model(p, laa::solve_fixed_point(p));
  for (auto _ : state) benchmark::DoNotOptimize(laa::ec_two_state(1e-5, 2e7, model));
}
BENCHMARK(BM_TwoState);

void BM_FourState(benchmark::State& state) {
  const auto p = defaults(laa::CwMode::kFixed);
  const laa::ServiceModel model(p, laa::solve_fixed_point(p));
  for (auto _ : state) benchmark::DoNotOptimize(laa::ec_four_state(1e-5, 2e7, model));
}
BENCHMARK(BM_FourState);

void BM_MaximizeEc(benchmark::State& state) {
  laa::SystemParams p;
  p.n_laa = 1;
  p.m_wifi = 4;
  p.k_users = static_cast<int>(state.range(0));
  p.bandwidth_hz = 20e6;
  p.mode = laa::CwMode::kVariable;
  const auto channels = laa::generate_scenario(p, 7);
  const auto cp = laa::solve_contention(p);
  for (auto _ : state) benchmark::DoNotOptimize(laa::maximize_ec(channels, 1e-3, p, cp));
}
BENCHMARK(BM_MaximizeEc)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Simulate10s(benchmark::State& state) {
  const auto p = defaults(laa::CwMode::kFixed);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(laa::simulate(p, 2e7, 10.0, seed++).slots);
}
BENCHMARK(BM_Simulate10s)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
