#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "pqr/albrekht.hpp"
#include "pqr/kron.hpp"
#include "pqr/models.hpp"
#include "pqr/schur_nway.hpp"

namespace {

using namespace pqr;

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

Index ipow(Index n, int k) {
    Index p = 1;
    for (int i = 0; i < k; ++i) p *= n;
    return p;
}

// args: n, d
void BM_KronApply(benchmark::State& state) {
    const Index n = state.range(0);
    const int d = static_cast<int>(state.range(1));
    std::mt19937_64 rng(1);
    std::vector<Matrix> factors;
    for (int i = 0; i < d; ++i) factors.push_back(random_matrix(rng, n, n));
    const ModeTensor v = ModeTensor::cube(n, d, random_matrix(rng, ipow(n, d), 1).col(0));
    for (auto _ : state) benchmark::DoNotOptimize(kron_apply(factors, v));
    state.SetItemsProcessed(state.iterations() * ipow(n, d));
}
BENCHMARK(BM_KronApply)->Args({3, 4})->Args({6, 4})->Args({8, 5})->Unit(benchmark::kMillisecond);

void BM_LyapSumApply(benchmark::State& state) {
    const Index n = state.range(0);
    const int d = static_cast<int>(state.range(1));
    std::mt19937_64 rng(2);
    const Matrix x = random_matrix(rng, n, n);
    const ModeTensor v = ModeTensor::cube(n, d, random_matrix(rng, ipow(n, d), 1).col(0));
    for (auto _ : state) benchmark::DoNotOptimize(lyap_sum_apply(x, d, v));
    state.SetItemsProcessed(state.iterations() * ipow(n, d));
}
BENCHMARK(BM_LyapSumApply)->Args({3, 4})->Args({6, 4})->Args({8, 5})->Unit(benchmark::kMillisecond);

void BM_NwaySolve(benchmark::State& state) {
    const Index n = state.range(0);
    const int d = static_cast<int>(state.range(1));
    std::mt19937_64 rng(3);
    const Matrix a = random_matrix(rng, n, n) - 2.0 * std::sqrt(double(n)) * Matrix::Identity(n, n);
    const SchurForm sf = schur_decompose(a);
    const ModeTensor b = ModeTensor::cube(n, d, random_matrix(rng, ipow(n, d), 1).col(0));
    for (auto _ : state) benchmark::DoNotOptimize(nway_solve(sf, d, b));
    state.SetItemsProcessed(state.iterations() * ipow(n, d));
}
BENCHMARK(BM_NwaySolve)->Args({3, 4})->Args({6, 4})->Args({8, 5})->Unit(benchmark::kMillisecond);

void BM_LorenzPqr(benchmark::State& state) {
    const BenchmarkInstance lz = lorenz();
    const int degree = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pqr::pqr(lz.system, lz.cost, degree));
}
BENCHMARK(BM_LorenzPqr)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
