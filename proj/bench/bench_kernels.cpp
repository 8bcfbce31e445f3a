// Parallel vs serial timings for the OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "bmllab/bml.hpp"
#include "bmllab/ops.hpp"

using namespace bmllab;

namespace {

MeshFunction sample(int n, int L, int J) {
    return synthesize(gen::RandomStep{7, -1, 1, std::nullopt, 0, 0.3}, n, L, J);
}

Exec policy(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_Maximal(benchmark::State& s) {
    const MeshFunction f = sample(2, 1, 4);
    for (auto _ : s) benchmark::DoNotOptimize(maximal_dyadic(f, {}, policy(s)));
}

void BM_BMLNorm(benchmark::State& s) {
    const MeshFunction f = sample(2, 1, 4);
    const BMLExponents e{2, 2, 3, 4};
    for (auto _ : s) benchmark::DoNotOptimize(bml_norm(f, e, policy(s)));
}

void BM_Hilbert(benchmark::State& s) {
    const MeshFunction f = sample(1, 4, 8);
    for (auto _ : s) benchmark::DoNotOptimize(hilbert_transform(f, Sampling::cell_average, policy(s)));
}

}  // namespace

BENCHMARK(BM_Maximal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BMLNorm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Hilbert)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
