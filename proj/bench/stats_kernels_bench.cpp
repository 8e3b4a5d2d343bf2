// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include "licensekit/random.hpp"
#include "licensekit/stats_kernels.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

namespace k = licensekit::stats::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    licensekit::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform();
    return v;
}

template <auto Fn>
void dominance(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = noise(n, 1), y = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <auto Fn>
void signed_rank(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::int64_t> ranks2(n);
    std::iota(ranks2.begin(), ranks2.end(), 1);
    for (auto& r : ranks2) r *= 2;
    const auto total = static_cast<std::int64_t>(n * (n + 1));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(ranks2, total / 4));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

template <auto Fn>
void cosine(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 384;
    const auto a = noise(rows * dim, 3), b = noise(rows * dim, 4);
    std::vector<double> out(rows);
    for (auto _ : state) {
        Fn(a, b, dim, out);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

} // namespace

BENCHMARK(dominance<k::serial::dominance>)->Name("dominance/serial")->Arg(100)->Arg(2000);
BENCHMARK(dominance<k::parallel::dominance>)->Name("dominance/parallel")->Arg(100)->Arg(2000);
BENCHMARK(signed_rank<k::serial::signed_rank_tail_count>)->Name("signed_rank/serial")->Arg(16)->Arg(22);
BENCHMARK(signed_rank<k::parallel::signed_rank_tail_count>)->Name("signed_rank/parallel")->Arg(16)->Arg(22);
BENCHMARK(cosine<k::serial::cosine_rows>)->Name("cosine_rows/serial")->Arg(500)->Arg(5000);
BENCHMARK(cosine<k::parallel::cosine_rows>)->Name("cosine_rows/parallel")->Arg(500)->Arg(5000);

BENCHMARK_MAIN();
