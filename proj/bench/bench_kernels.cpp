// Parallel kernels against their serial reference versions, plus the cost of
// one full chain iteration.
#include <benchmark/benchmark.h>

#include <map>

#include "curemc/gradient.hpp"
#include "curemc/likelihood.hpp"
#include "curemc/parallel.hpp"
#include "curemc/sampler.hpp"
#include "curemc/simgen.hpp"

namespace {

using namespace curemc;

const SimulatedData& dataset(std::size_t n) {
  static std::map<std::size_t, SimulatedData> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, generate(find_scenario("A1"), n, 11, 0.68)).first;
  return it->second;
}

void BM_loglik_parallel(benchmark::State& st) {
  const auto& sim = dataset(static_cast<std::size_t>(st.range(0)));
  const ModelParams& p = find_scenario("A1").params;
  for (auto _ : st) benchmark::DoNotOptimize(complete_loglik(p, sim.data, sim.truth));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_loglik_reference(benchmark::State& st) {
  const auto& sim = dataset(static_cast<std::size_t>(st.range(0)));
  const ModelParams& p = find_scenario("A1").params;
  for (auto _ : st) benchmark::DoNotOptimize(reference::complete_loglik(p, sim.data, sim.truth));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_gradient_parallel(benchmark::State& st) {
  const auto& sim = dataset(static_cast<std::size_t>(st.range(0)));
  const ModelParams& p = find_scenario("A1").params;
  for (auto _ : st) benchmark::DoNotOptimize(grad_complete_loglik(p, sim.data, sim.truth, 1.0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_gradient_reference(benchmark::State& st) {
  const auto& sim = dataset(static_cast<std::size_t>(st.range(0)));
  const ModelParams& p = find_scenario("A1").params;
  for (auto _ : st) benchmark::DoNotOptimize(reference::grad_complete_loglik(p, sim.data, sim.truth, 1.0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_chain_iteration(benchmark::State& st) {
  const auto& sim = dataset(static_cast<std::size_t>(st.range(0)));
  const Prior prior(preset_hyperparams(PriorPreset::regularized, 3));
  ChainState s = make_chain(find_scenario("A1").params, sim.truth, 1.0, ProposalScales::defaults(3),
                            make_stream(3, 1), sim.data);
  for (auto _ : st) chain_iteration(s, sim.data, prior, 0.5);
}

}  // namespace

BENCHMARK(BM_loglik_parallel)->Arg(500)->Arg(5000)->Arg(50000);
BENCHMARK(BM_loglik_reference)->Arg(500)->Arg(5000)->Arg(50000);
BENCHMARK(BM_gradient_parallel)->Arg(500)->Arg(5000)->Arg(50000);
BENCHMARK(BM_gradient_reference)->Arg(500)->Arg(5000)->Arg(50000);
BENCHMARK(BM_chain_iteration)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
