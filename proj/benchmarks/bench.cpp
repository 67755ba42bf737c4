#include <benchmark/benchmark.h>

#include "smcgen/genealogy.hpp"
#include "smcgen/kingman.hpp"
#include "smcgen/model.hpp"
#include "smcgen/resampling.hpp"
#include "smcgen/smc.hpp"

using namespace smcgen;

namespace {

WeightVector random_weights(int n, Rng& rng) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = -std::log1p(-rng.uniform());
    return WeightVector::normalized(std::move(w));
}

void bench_resample(benchmark::State& state, Scheme scheme) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(42);
    const auto weights = random_weights(n, rng);
    for (auto _ : state) {
        auto parents = resample(scheme, weights, rng);
        benchmark::DoNotOptimize(parents.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_smc_neutral(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int horizon = 256;
    const auto model = neutral_model(horizon);
    RunOptions options;
    options.store_states = false;
    options.store_weights = false;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto history = run_smc(model, n, Scheme::multinomial, seed++, options);
        benchmark::DoNotOptimize(history.ancestors.data());
    }
    state.SetItemsProcessed(state.iterations() * n * horizon);
}

void bench_smc_ou(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int horizon = 256;
    OuModelConfig config;
    config.step_size = 0.1;
    config.obs_noise = 0.1;
    config.observations = simulate_ou_trajectory(config, horizon, 9).observations;
    const auto model = bootstrap_model(config);
    RunOptions options;
    options.store_states = false;
    options.store_weights = false;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto history = run_smc(model, n, Scheme::systematic, seed++, options);
        benchmark::DoNotOptimize(history.ancestors.data());
    }
    state.SetItemsProcessed(state.iterations() * n * horizon);
}

void bench_coalescence_stats(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(7);
    const auto weights = random_weights(n, rng);
    const auto counts = offspring_counts(resample_multinomial(weights, rng), n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pair_merger_prob(counts));
        benchmark::DoNotOptimize(multi_merger_bound(counts));
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_merger_matrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(7);
    const auto weights = random_weights(n, rng);
    const auto counts = offspring_counts(resample_multinomial(weights, rng), n);
    for (auto _ : state) {
        auto matrix = merger_transition_matrix(counts, 3);
        benchmark::DoNotOptimize(matrix.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bench_trace(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = neutral_model(20 * n);
    const auto history = run_smc(model, n, Scheme::multinomial, 3);
    std::vector<int> leaves = {0, 1, 2, 3};
    for (auto _ : state) {
        auto trace = trace_genealogy(history, leaves);
        benchmark::DoNotOptimize(trace.mrca_generation);
    }
}

void bench_expm(benchmark::State& state) {
    const auto gen = build_generator(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto m = transition_matrix(gen, 1.0);
        benchmark::DoNotOptimize(m.data());
    }
}

void bench_coalescent_sim(benchmark::State& state) {
    Rng rng(5);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_tree_height(n, rng));
}

} // namespace

BENCHMARK_CAPTURE(bench_resample, multinomial, Scheme::multinomial)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(bench_resample, residual, Scheme::residual)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(bench_resample, stratified, Scheme::stratified)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(bench_resample, systematic, Scheme::systematic)->Arg(1024)->Arg(8192);
BENCHMARK(bench_smc_neutral)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_smc_ou)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_coalescence_stats)->Arg(1024)->Arg(8192);
BENCHMARK(bench_merger_matrix)->Arg(1024);
BENCHMARK(bench_trace)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_expm)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_coalescent_sim)->Arg(100);

BENCHMARK_MAIN();
