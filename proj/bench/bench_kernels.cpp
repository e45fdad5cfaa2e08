// Kernel timings: vectorized OpenMP sampler against the serial reference,
// and closed-form evaluation cost.

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "comp/analytic.hpp"
#include "comp/montecarlo.hpp"
#include "comp/optimize.hpp"

namespace {

std::vector<double> profile(std::size_t n) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  std::vector<double> p(n);
  for (double& v : p) v = std::pow(10.0, u(gen));
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

void BM_SampleSinr(benchmark::State& st) {
  const auto p = profile(static_cast<std::size_t>(st.range(0)));
  const comp::LinkQuery q = comp::nested_link(p, 2, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(comp::sample_sinr(q, 1, 10'000));
  st.SetItemsProcessed(st.iterations() * 10'000 * st.range(0));
}

void BM_SampleSinrReference(benchmark::State& st) {
  const auto p = profile(static_cast<std::size_t>(st.range(0)));
  const comp::LinkQuery q = comp::nested_link(p, 2, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(comp::sample_sinr_reference(q, 1, 10'000));
  st.SetItemsProcessed(st.iterations() * 10'000 * st.range(0));
}

void BM_NestedSinr(benchmark::State& st) {
  const auto p = profile(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(comp::sample_nested_sinr(p, 0.0, 8, 1, 10'000));
  st.SetItemsProcessed(st.iterations() * 10'000 * st.range(0));
}

void BM_NestedSinrReference(benchmark::State& st) {
  const auto p = profile(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(comp::sample_nested_sinr_reference(p, 0.0, 8, 1, 10'000));
  st.SetItemsProcessed(st.iterations() * 10'000 * st.range(0));
}

// 40 stations over six decades keeps the top eight well separated; the
// 900-station profile packs them closely enough to trigger the fallback.
void BM_OutageEvaluate(benchmark::State& st) {
  const auto p = profile(40);
  const comp::OutageModel m(comp::nested_link(p, static_cast<std::size_t>(st.range(0)), 0.0));
  double g = 0.5;
  for (auto _ : st) {
    benchmark::DoNotOptimize(m(g));
    g = g < 10.0 ? g * 1.01 : 0.5;
  }
}

void BM_MaximizeGoodput(benchmark::State& st) {
  const auto p = profile(40);
  const comp::OutageModel m(comp::nested_link(p, static_cast<std::size_t>(st.range(0)), 0.0));
  for (auto _ : st) benchmark::DoNotOptimize(comp::maximize_goodput(m));
}

}  // namespace

BENCHMARK(BM_SampleSinr)->Arg(16)->Arg(900);
BENCHMARK(BM_SampleSinrReference)->Arg(16)->Arg(900);
BENCHMARK(BM_NestedSinr)->Arg(900);
BENCHMARK(BM_NestedSinrReference)->Arg(900);
BENCHMARK(BM_OutageEvaluate)->Arg(1)->Arg(4)->Arg(8);
BENCHMARK(BM_MaximizeGoodput)->Arg(1)->Arg(8);

BENCHMARK_MAIN();
