// Matrix throughput: OpenMP over cells vs the serial reference.

#include <benchmark/benchmark.h>

#include <sstream>

#include "rcasim/experiment.hpp"

using namespace rcasim;

namespace {

// A scaled-down ESP matrix: 12 cells of 230 jobs on 32 hosts.
ExperimentConfig small_matrix() {
  std::istringstream in(
      "[platform]\nhosts = 32\n"
      "[workload]\nprofiles = balanced, imbalanced\nscale_hosts = 32\ntasks_per_host = 16\n"
      "lower_bound_makespan = 600\nestimated_makespan = 600\n"
      "[als]\npolicy = static, gss, af\n"
      "[bls]\nrca = off, on\n"
      "[run]\nseeds = 1\ntraces = off\n");
  return parse_config(in);
}

void BM_MatrixSerial(benchmark::State& state) {
  const auto config = small_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(run_matrix_serial(config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(expand_matrix(config).size()));
}

void BM_MatrixParallel(benchmark::State& state) {
  const auto config = small_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(run_matrix(config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(expand_matrix(config).size()));
}

}  // namespace

BENCHMARK(BM_MatrixSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatrixParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
