#include <benchmark/benchmark.h>

#include "erlq/config.hpp"
#include "erlq/eval.hpp"
#include "erlq/rollout.hpp"
#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"

namespace {

using namespace erlq;

const SystemParams& params() {
  static const SystemParams p = reference_experiment().system;
  return p;
}

GaussianPolicy start_policy() {
  GaussianPolicy pol;
  pol.K = Vec::Zero(params().n());
  pol.Sigma = 0.5 * Mat::Identity(params().n(), params().n());
  return pol;
}

void BM_evaluate(benchmark::State& state) {
  const GaussianPolicy pol = start_policy();
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate(params(), pol.K, pol.Sigma));
}
BENCHMARK(BM_evaluate);

void BM_gradients(benchmark::State& state) {
  const GaussianPolicy pol = start_policy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_k(params(), pol.K, pol.Sigma));
    benchmark::DoNotOptimize(grad_sigma(params(), pol.K, pol.Sigma));
  }
}
BENCHMARK(BM_gradients);

void BM_solve_are(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(solve_are(params()));
}
BENCHMARK(BM_solve_are);

void BM_rollout(benchmark::State& state) {
  const GaussianPolicy pol = start_policy();
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sample_rollout(params(), pol, static_cast<int>(state.range(0)),
                       seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_rollout)->Arg(30)->Arg(100);

void BM_exact_step(benchmark::State& state) {
  const GaussianPolicy pol = start_policy();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rpg_step(params(), pol.K, pol.Sigma, 0.01, 0.001));
}
BENCHMARK(BM_exact_step);

void BM_gradient_estimate(benchmark::State& state) {
  const GaussianPolicy pol = start_policy();
  SbrpgConfig cfg;
  cfg.samples = state.range(0);
  cfg.horizon = 30;
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        estimate_grad_k_and_s(params(), pol.K, pol.Sigma, cfg, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_gradient_estimate)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
