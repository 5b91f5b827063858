#include <benchmark/benchmark.h>

#include "dynaboard/perturb.hpp"

namespace {

using namespace dynaboard;

std::vector<GoldExample> bench_dataset(int n) {
  const char* texts[] = {
      "Katie loved the concert and she would definitely go again with her sister.",
      "What a terrible restaurant, the service was slow and the waiter did not care.",
      "James said the hotel is located near the station, which is very convenient.",
      "We booked Molly Maid for the weekend and they were not on time."};
  std::vector<GoldExample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"ex-" + std::to_string(i), {{"text", texts[i % 4]}}, {"positive"}});
  }
  return out;
}

void BM_PerturbFairness(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  const std::vector<Perturbation> kinds{FairnessKind::kRace, FairnessKind::kGender};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(perturb_dataset(data, kinds, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PerturbFairness)->Arg(100)->Arg(1000);

void BM_PerturbRobustness(benchmark::State& state) {
  const auto data = bench_dataset(static_cast<int>(state.range(0)));
  std::vector<Perturbation> kinds;
  for (auto t : all_robustness_transforms()) kinds.push_back(t);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(perturb_dataset(data, kinds, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PerturbRobustness)->Arg(100)->Arg(1000);

}  // namespace
