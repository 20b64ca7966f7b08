#include <benchmark/benchmark.h>

#include "erlab/config.hpp"
#include "erlab/metrics.hpp"
#include "erlab/oracle.hpp"
#include "erlab/trainer.hpp"

using namespace erlab;

namespace {

PolicyParams bench_params(const WorldConfig& world, std::uint64_t seed) {
    PolicyParams params = PolicyParams::zeros(world);
    Rng rng(seed);
    for (double& w : params.weights) w = rng.next_range(-1.5, 1.5);
    return params;
}

void BM_SampleTrajectory(benchmark::State& state) {
    const WorldConfig world = default_world();
    const Task task = generate_task(3, world);
    const PolicyParams params = bench_params(world, 11);
    std::uint64_t rollout = 0;
    for (auto _ : state) {
        Rng rng(derive_stream_seed(1, 2, StreamTag::PriorRollout, rollout++));
        benchmark::DoNotOptimize(
            sample_trajectory(params, task, Conditioning::prior(), rng));
    }
}
BENCHMARK(BM_SampleTrajectory);

void BM_EnumerateWorld(benchmark::State& state) {
    const WorldConfig world = default_world();
    const Task task = generate_task(5, world);
    const PolicyParams params = bench_params(world, 13);
    const HyperParams hp;
    for (auto _ : state) {
        benchmark::DoNotOptimize(enumerate_world(params, task, hp));
    }
}
BENCHMARK(BM_EnumerateWorld);

void BM_TrainStep(benchmark::State& state) {
    const WorldConfig world = default_world();
    const HyperParams hp;
    std::vector<BatchTask> batch;
    for (int j = 0; j < 16; ++j) {
        const std::uint64_t task_seed =
            derive_stream_seed(7, 0, StreamTag::TaskGen, static_cast<std::uint64_t>(j));
        batch.push_back(BatchTask{generate_task(task_seed, world), task_seed});
    }
    PolicyParams params = bench_params(world, 17);
    OptimizerState opt = OptimizerState::init(params.layout.dim());
    std::uint64_t step_seed = 0;
    for (auto _ : state) {
        train_step(params, batch, hp, step_seed++, opt);
    }
}
BENCHMARK(BM_TrainStep);

void BM_KeywordScan(benchmark::State& state) {
    const KeywordDictionary dict = default_keyword_dictionary();
    std::string text;
    for (int i = 0; i < 2000; ++i) {
        text += i % 37 == 0 ? "Wait maybe " : "token filler ";
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(keyword_scan(text, dict));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_KeywordScan);

} // namespace

BENCHMARK_MAIN();
