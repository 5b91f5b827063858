#include <benchmark/benchmark.h>

#include <random>

#include "dynaboard/scoring.hpp"

namespace {

using namespace dynaboard;

TaskConfig bench_task() {
  TaskConfig task;
  task.task_id = "bench";
  task.name = "Bench";
  task.perf_metric_id = "perf";
  task.metrics = {{"perf", "", Direction::kMaximize, std::nullopt, ""},
                  {"throughput", "", Direction::kMaximize, std::nullopt, ""},
                  {"memory", "", Direction::kMinimize, 16.0, ""},
                  {"fairness", "", Direction::kMaximize, std::nullopt, ""},
                  {"robustness", "", Direction::kMaximize, std::nullopt, ""}};
  task.datasets = {{"a", "bench/a.jsonl", 1.0}, {"b", "bench/b.jsonl", 1.0}};
  return task;
}

std::vector<MetricRecord> bench_records(int models) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pct(20.0, 95.0);
  std::uniform_real_distribution<double> mem(0.5, 15.0);
  std::vector<MetricRecord> out;
  for (int m = 0; m < models; ++m) {
    for (const char* d : {"a", "b"}) {
      for (const char* metric : {"perf", "throughput", "memory", "fairness", "robustness"}) {
        const double v = std::string(metric) == "memory" ? mem(rng) : pct(rng);
        out.push_back({"bench", "model-" + std::to_string(m), d, metric, v, {}});
      }
    }
  }
  return out;
}

void BM_RankLeaderboard(benchmark::State& state) {
  const TaskConfig task = bench_task();
  const auto records = bench_records(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_leaderboard(records, task, WeightSpec{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankLeaderboard)->Arg(8)->Arg(64)->Arg(512);

void BM_ExchangeRates(benchmark::State& state) {
  const TaskConfig task = bench_task();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(1.0, 100.0);
  std::vector<ModelMetrics> goods;
  for (int i = 0; i < state.range(0); ++i) {
    goods.push_back({"m" + std::to_string(i),
                     {{"perf", v(rng)}, {"throughput", v(rng)}, {"memory", v(rng)},
                      {"fairness", v(rng)}, {"robustness", v(rng)}}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(exchange_rates(goods, task));
}
BENCHMARK(BM_ExchangeRates)->Arg(8)->Arg(512);

}  // namespace
