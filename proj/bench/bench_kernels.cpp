// Serial reference loops against the OpenMP kernels, plus the node-parallel
// entropy-variation sweep. Run with --benchmark_filter=<name> to narrow.
#include <benchmark/benchmark.h>

#include <random>

#include "scclg/cellgraph.hpp"
#include "scclg/curriculum.hpp"
#include "scclg/kernels.hpp"

using namespace scclg;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Matrix m(r, c);
    for (double& v : m.values()) v = d(rng);
    return m;
}

void BM_GemmSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Matrix a = random_matrix(n, 256, 1), b = random_matrix(256, 256, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::gemm(a, b));
    st.SetItemsProcessed(static_cast<int64_t>(st.iterations() * n * 256 * 256));
}

void BM_GemmParallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Matrix a = random_matrix(n, 256, 1), b = random_matrix(256, 256, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::gemm(a, b));
    st.SetItemsProcessed(static_cast<int64_t>(st.iterations() * n * 256 * 256));
    st.counters["threads"] = kernels::max_threads();
}

void BM_GemmTNSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Matrix a = random_matrix(n, 256, 1), b = random_matrix(n, 128, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::gemm(a, b, kernels::Trans::Yes));
}

void BM_GemmTNParallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Matrix a = random_matrix(n, 256, 1), b = random_matrix(n, 128, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::gemm(a, b, kernels::Trans::Yes));
}

void BM_SpmmSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const CellGraph g = knn_graph(random_matrix(n, 20, 3), 15);
    const Matrix x = random_matrix(n, 256, 4);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::spmm(g.scaled_laplacian, x));
}

void BM_SpmmParallel(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const CellGraph g = knn_graph(random_matrix(n, 20, 3), 15);
    const Matrix x = random_matrix(n, 256, 4);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::spmm(g.scaled_laplacian, x));
}

void BM_DistancesSerial(benchmark::State& st) {
    const Matrix x = random_matrix(static_cast<std::size_t>(st.range(0)), 500, 5);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::pairwise_sq_distances(x));
}

void BM_DistancesParallel(benchmark::State& st) {
    const Matrix x = random_matrix(static_cast<std::size_t>(st.range(0)), 500, 5);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_sq_distances(x));
}

void BM_GlobalDifficultySerial(benchmark::State& st) {
    const CellGraph g = knn_graph(random_matrix(static_cast<std::size_t>(st.range(0)), 20, 6), 20);
    for (auto _ : st) benchmark::DoNotOptimize(serial::global_difficulty(g));
}

void BM_GlobalDifficultyParallel(benchmark::State& st) {
    const CellGraph g = knn_graph(random_matrix(static_cast<std::size_t>(st.range(0)), 20, 6), 20);
    for (auto _ : st) benchmark::DoNotOptimize(global_difficulty(g));
}

}  // namespace

BENCHMARK(BM_GemmSerial)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GemmParallel)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GemmTNSerial)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GemmTNParallel)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpmmSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpmmParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistancesSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistancesParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GlobalDifficultySerial)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GlobalDifficultyParallel)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
