#include <benchmark/benchmark.h>

#include "knudsen/billiard.hpp"
#include "knudsen/diffusivity.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/markov.hpp"

using namespace knudsen;

static void BM_trace_cell(benchmark::State& state) {
    const auto profile = make_bumps(state.range(0) / 10.0);
    double r = 0.123;
    for (auto _ : state) {
        const auto traj = trace_cell(profile, r, 0.37);
        benchmark::DoNotOptimize(traj.exit.x);
        r += 0.000137;
        if (r > 1.0) r -= 1.0;
    }
}
BENCHMARK(BM_trace_cell)->Arg(2)->Arg(10)->Arg(20);

static void BM_build_matrix(benchmark::State& state) {
    const auto profile = make_bumps(0.5);
    const int M = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto P = build_matrix(profile, M, 200);
        benchmark::DoNotOptimize(P.entries(0, 0));
    }
}
BENCHMARK(BM_build_matrix)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_spectral_summary(benchmark::State& state) {
    const auto P = build_matrix(make_bumps(0.5), static_cast<int>(state.range(0)), 500);
    for (auto _ : state) {
        const auto s = spectral_summary(P);
        benchmark::DoNotOptimize(s.gap);
    }
}
BENCHMARK(BM_spectral_summary)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_lser(benchmark::State& state) {
    const auto f = displacement_observable(50000.0);
    for (auto _ : state) {
        const auto rep = lser_sigma2(f, 0.02, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(rep.sigma2);
    }
}
BENCHMARK(BM_lser)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
