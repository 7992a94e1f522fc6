// Serial (threads = 1) against OpenMP kernels. Thread count is the benchmark
// argument; results are bit-identical across counts, only wall time differs.
#include <benchmark/benchmark.h>

#include "mbc/curriculum.hpp"
#include "mbc/eval.hpp"
#include "mbc/oracle.hpp"
#include "mbc/parallel.hpp"
#include "mbc/rng.hpp"
#include "mbc/value_net.hpp"

namespace {

using namespace mbc;

const DistributionConfig& desk() {
  static const DistributionConfig d = DistributionConfig::preset("desk");
  return d;
}

std::vector<ValueSample> batch_of(int m) {
  std::vector<ValueSample> out;
  for (int i = 0; i < m; ++i) {
    const GameState s = random_rollback(desk(), {Phase::Protection, 1}, 100 + i);
    out.push_back({s, static_cast<double>(exact_value(s))});
  }
  return out;
}

void BM_LossAndGradient(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const ValueNetwork net = init_network(ModelConfig::desk(12), 1);
  const auto batch = batch_of(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(net, batch, Mode::Train, 7, threads).loss);
  }
}
BENCHMARK(BM_LossAndGradient)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_StageDataset(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  ExpertList experts;
  experts.add({Phase::Protection, 1}, init_network(ModelConfig::desk(12), 2));
  for (auto _ : state) {
    const auto d = build_stage_dataset(desk(), {Phase::Attack, 1}, experts, 64, 0, 3, threads);
    benchmark::DoNotOptimize(d.train.data());
  }
}
BENCHMARK(BM_StageDataset)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EvaluateRandom(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  std::vector<SolvedInstance> data;
  for (int i = 0; i < 64; ++i) {
    const GameState s = sample_instance(desk(), derive_seed(5, "bench", i));
    data.push_back({std::to_string(i), s, exact_value(s)});
  }
  const RandomPolicy policy(10);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_policy(data, policy, 1, threads).eta);
}
BENCHMARK(BM_EvaluateRandom)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveInstances(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  std::vector<GameState> states;
  for (int i = 0; i < 32; ++i) states.push_back(sample_instance(desk(), derive_seed(6, "bench", i)));
  std::vector<Weight> values(states.size());
  for (auto _ : state) {
    parallel_for(static_cast<int>(states.size()), threads,
                 [&](int i) { values[i] = minimax_value(states[i]).value; });
    benchmark::DoNotOptimize(values.data());
  }
}
BENCHMARK(BM_SolveInstances)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
