#include <benchmark/benchmark.h>

#include <cmath>

#include "recon/analysis.hpp"
#include "recon/evolve.hpp"
#include "recon/montecarlo.hpp"

using namespace recon;

namespace {

const Channel kCritical = channel_from_theta_delta(1.0 / std::sqrt(2.0), 0.01);

void BM_EvolveBinned(benchmark::State& state) {
    const auto cap = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto trace = evolve(2, kCritical, 10, BinningPolicy{1e-6, cap, true});
        benchmark::DoNotOptimize(trace.levels.back().second_moment());
    }
    state.SetLabel("depth 10, cap " + std::to_string(cap));
}
BENCHMARK(BM_EvolveBinned)->Arg(1000)->Arg(4000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
    const auto tree =
        build_regular_tree(2, static_cast<int>(state.range(0)), channel_from_theta_delta(0.5, 0.1));
    for (auto _ : state) {
        auto dist = brute_force_distribution(tree);
        benchmark::DoNotOptimize(dist.second_moment());
    }
    state.SetComplexityN(tree.n_leaves());
}
BENCHMARK(BM_BruteForce)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_McSample(benchmark::State& state) {
    const auto tree = build_regular_tree(2, 10, channel_from_theta_delta(0.6, 0.01));
    std::uint64_t seed = 0;
    std::int64_t samples = 0;
    for (auto _ : state) {
        auto est = estimate_second_moment(tree, 2048, seed++);
        benchmark::DoNotOptimize(est.mean);
        samples += est.n_samples;
    }
    state.SetItemsProcessed(samples);
}
BENCHMARK(BM_McSample);

void BM_CutsetDp(benchmark::State& state) {
    const auto tree =
        build_regular_tree(2, static_cast<int>(state.range(0)), channel_from_theta_delta(0.6, 0.0));
    for (auto _ : state) {
        auto [w, cut] = min_cutset_weight(tree, 0.9);
        benchmark::DoNotOptimize(w);
        benchmark::DoNotOptimize(cut.vertices.size());
    }
    state.SetLabel(std::to_string(tree.n_vertices()) + " vertices");
}
BENCHMARK(BM_CutsetDp)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_InequalityGrid(benchmark::State& state) {
    for (auto _ : state) {
        auto check = basic_inequality_grid(0.6, 0.02, 101);
        benchmark::DoNotOptimize(check.min_gap);
    }
}
BENCHMARK(BM_InequalityGrid);

}  // namespace

BENCHMARK_MAIN();
