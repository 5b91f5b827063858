#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dynaboard/aggregate.hpp"
#include "dynaboard/error.hpp"
#include "dynaboard/scoring.hpp"
#include "dynaboard/weights.hpp"
#include "test_support.hpp"

namespace dynaboard {
namespace {

using testing::five_metric_task;
using testing::published_records;

ModelMetrics mm(const std::string& id, std::map<std::string, double> values) {
  return {id, std::move(values)};
}

TaskConfig two_metric_task() {
  TaskConfig t = five_metric_task("t");
  t.metrics = {t.metrics[0], t.metrics[1]};
  return t;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::kIoError;
}

std::vector<ModelMetrics> nli_goods() {
  const TaskConfig task = five_metric_task("nli");
  const auto records = published_records("nli");
  return aggregate_datasets(records, {{"scoring", 1}}, task);
}

TEST(SortByPerformance, DescendingWithIdTieBreak) {
  const std::vector<ModelMetrics> in{mm("b", {{"perf", 50}}), mm("a", {{"perf", 50}}),
                                     mm("c", {{"perf", 70}})};
  const auto out = sort_by_performance(in, "perf");
  EXPECT_EQ(out[0].model_id, "c");
  EXPECT_EQ(out[1].model_id, "a");
  EXPECT_EQ(out[2].model_id, "b");
}

TEST(MrsSet, SingleSlope) {
  const std::vector<ModelMetrics> sorted{mm("x", {{"perf", 80}, {"m", 10}}),
                                         mm("y", {{"perf", 70}, {"m", 12}})};
  const auto mrs = mrs_set(sorted, "m", "perf", 1e-4);
  ASSERT_EQ(mrs.size(), 1u);
  EXPECT_DOUBLE_EQ(mrs[0], 0.2);
}

TEST(MrsSet, ThroughputPairFromTopOfNli) {
  const std::vector<ModelMetrics> sorted{mm("deberta", {{"perf", 69.54}, {"t", 7.41}}),
                                         mm("roberta", {{"perf", 69.07}, {"t", 9.23}})};
  const auto mrs = mrs_set(sorted, "t", "perf", 1e-4);
  ASSERT_EQ(mrs.size(), 1u);
  EXPECT_NEAR(mrs[0], 1.82 / 0.47, 1e-9);
  EXPECT_NEAR(mrs[0], 3.8723, 1e-4);
}

TEST(MrsSet, EpsilonSmallPairDropped) {
  const std::vector<ModelMetrics> sorted{mm("x", {{"perf", 50 + 1e-5}, {"m", 3}}),
                                         mm("y", {{"perf", 50}, {"m", 9}})};
  EXPECT_TRUE(mrs_set(sorted, "m", "perf", 1e-4).empty());
}

TEST(MrsSet, TooFewModels) {
  const std::vector<ModelMetrics> one{mm("x", {{"perf", 1}, {"m", 1}})};
  EXPECT_EQ(code_of([&] { mrs_set(one, "m", "perf", 1e-4); }), Errc::kTooFewModels);
}

TEST(Amrs, MeanOfSlopes) {
  EXPECT_DOUBLE_EQ(amrs(std::vector<double>{0.2}), 0.2);
  EXPECT_DOUBLE_EQ(amrs(std::vector<double>{1, 3}), 2);
  EXPECT_EQ(code_of([] { amrs(std::vector<double>{}); }), Errc::kEmptyMrsSet);
  EXPECT_EQ(code_of([] { amrs(std::vector<double>{0, 0}); }), Errc::kZeroAmrs);
}

TEST(Amrs, NliThroughputOverSevenModels) {
  const TaskConfig task = five_metric_task("nli");
  const auto sorted = sort_by_performance(nli_goods(), "perf");
  const auto mrs = mrs_set(sorted, "throughput", "perf", task.epsilon);
  EXPECT_EQ(mrs.size(), 6u);
  EXPECT_NEAR(amrs(mrs), 4.9021, 1e-3);
}

TEST(ExchangeRates, TwoModelsTwoMetrics) {
  const TaskConfig task = two_metric_task();
  const std::vector<ModelMetrics> goods{mm("a", {{"perf", 80}, {"throughput", 10}}),
                                        mm("b", {{"perf", 70}, {"throughput", 12}})};
  const auto table = exchange_rates(goods, task);
  EXPECT_EQ(table.rates.size(), 2u);
  EXPECT_DOUBLE_EQ(table.amrs("perf"), 1.0);
  EXPECT_DOUBLE_EQ(table.amrs("throughput"), 0.2);
  EXPECT_EQ(code_of([&] { table.amrs("memory"); }), Errc::kMissingRate);
}

TEST(ExchangeRates, NliMatchesReferenceScript) {
  const auto table = exchange_rates(nli_goods(), five_metric_task("nli"));
  EXPECT_DOUBLE_EQ(table.amrs("perf"), 1.0);
  EXPECT_NEAR(table.amrs("throughput"), 4.9021, 1e-3);
  EXPECT_NEAR(table.amrs("memory"), 12.0171, 1e-3);
  EXPECT_NEAR(table.amrs("fairness"), 5.5107, 1e-3);
  EXPECT_NEAR(table.amrs("robustness"), 6.4811, 1e-3);

  const auto oracle = testing::oracle_score(testing::oracle_models("nli"), {1, 1, 1, 1, 1});
  const char* ids[] = {"perf", "throughput", "memory", "fairness", "robustness"};
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(table.amrs(ids[k]), oracle.rates[k], 1e-9) << ids[k];
}

TEST(ExchangeRates, ConstantMetricIsZeroAmrs) {
  const TaskConfig task = two_metric_task();
  const std::vector<ModelMetrics> goods{mm("a", {{"perf", 80}, {"throughput", 5}}),
                                        mm("b", {{"perf", 70}, {"throughput", 5}})};
  try {
    exchange_rates(goods, task);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kZeroAmrs);
    EXPECT_EQ(e.subject(), "throughput");
  }
}

TEST(Dynascore, PerfOnlyIsPerf) {
  const auto goods = nli_goods();
  const auto rates = exchange_rates(goods, five_metric_task("nli"));
  for (const auto& m : goods) {
    EXPECT_DOUBLE_EQ(dynascore(m, {{"perf", 1.0}}, rates), m.at("perf"));
  }
}

TEST(Dynascore, AllZeroValuesScoreZero) {
  const auto rates = exchange_rates(nli_goods(), five_metric_task("nli"));
  const ModelMetrics zero = mm("z", {{"perf", 0}, {"throughput", 0}, {"memory", 0},
                                     {"fairness", 0}, {"robustness", 0}});
  const auto w = default_weights(five_metric_task("nli").metric_ids(), "perf");
  EXPECT_DOUBLE_EQ(dynascore(zero, w, rates), 0.0);
}

TEST(Dynascore, DebertaNliNearPublished) {
  const auto goods = nli_goods();
  const TaskConfig task = five_metric_task("nli");
  const auto rates = exchange_rates(goods, task);
  const auto w = default_weights(task.metric_ids(), "perf");
  const auto oracle = testing::oracle_score(testing::oracle_models("nli"), {4, 1, 1, 1, 1});
  for (const auto& m : goods) {
    EXPECT_NEAR(dynascore(m, w, rates), oracle.dynascore.at(m.model_id), 1e-9) << m.model_id;
  }
  EXPECT_NEAR(oracle.dynascore.at("nli-deberta"), 38.61, 0.01);
  EXPECT_NEAR(oracle.dynascore.at("nli-deberta"), 38.83, 0.5);
}

TEST(Dynascore, MissingRateThrows) {
  ExchangeRateTable rates;
  rates.rates["perf"] = {1.0, 1};
  EXPECT_EQ(code_of([&] {
              dynascore(mm("a", {{"perf", 1}, {"m", 1}}), {{"perf", 0.5}, {"m", 0.5}}, rates);
            }),
            Errc::kMissingRate);
}

TEST(AvgZscore, TwoModelsOneMetric) {
  const std::vector<ModelMetrics> goods{mm("a", {{"m", 1}}), mm("b", {{"m", 3}})};
  const auto z = avg_zscore(goods, {{"m", 1.0}});
  EXPECT_DOUBLE_EQ(z.at("a"), -1.0);
  EXPECT_DOUBLE_EQ(z.at("b"), 1.0);
}

TEST(AvgZscore, ConstantMetricContributesZero) {
  const std::vector<ModelMetrics> goods{mm("a", {{"m", 1}, {"c", 7}}),
                                        mm("b", {{"m", 3}, {"c", 7}})};
  const auto z = avg_zscore(goods, {{"m", 0.5}, {"c", 0.5}});
  EXPECT_DOUBLE_EQ(z.at("a"), -0.5);
  EXPECT_DOUBLE_EQ(z.at("b"), 0.5);
}

TEST(AvgZscore, NliMajorityAboveBert) {
  const TaskConfig task = five_metric_task("nli");
  const auto z = avg_zscore(nli_goods(), default_weights(task.metric_ids(), "perf"));
  EXPECT_GT(z.at("nli-majority-baseline"), z.at("nli-bert"));
  EXPECT_NEAR(z.at("nli-majority-baseline"), 0.10, 0.005);
  EXPECT_NEAR(z.at("nli-bert"), 0.06, 0.005);
}

TEST(EffectiveExchangeRates, DefaultWeightsGiveAmrsAndZeroWeightGivesInfinity) {
  ExchangeRateTable rates;
  rates.rates["perf"] = {1.0, 3};
  rates.rates["m"] = {4.0, 3};
  const WeightMap defaults{{"perf", 0.5}, {"m", 0.5}};
  const auto same = effective_exchange_rates(defaults, defaults, rates);
  EXPECT_DOUBLE_EQ(same.at("m"), 4.0);
  const auto shifted = effective_exchange_rates(defaults, {{"perf", 0.75}, {"m", 0.25}}, rates);
  EXPECT_DOUBLE_EQ(shifted.at("m"), 8.0);
  const auto dropped = effective_exchange_rates(defaults, {{"perf", 1.0}}, rates);
  EXPECT_TRUE(std::isinf(dropped.at("m")));
}

TEST(ResolveWeightSpec, DefaultsAbsentIdsAndRejections) {
  const TaskConfig task = five_metric_task("t", {"a", "b"});
  const auto defaults = resolve_weight_spec(task, {});
  EXPECT_DOUBLE_EQ(defaults.metric_weights.at("perf"), 0.5);
  EXPECT_DOUBLE_EQ(defaults.dataset_weights.at("b"), 1.0);

  const auto partial = resolve_weight_spec(task, {{{"perf", 2}}, {}});
  EXPECT_DOUBLE_EQ(partial.metric_weights.at("perf"), 2);
  EXPECT_DOUBLE_EQ(partial.metric_weights.at("memory"), 0);

  EXPECT_EQ(code_of([&] { resolve_weight_spec(task, {{{"speed", 1}}, {}}); }),
            Errc::kUnknownMetric);
  EXPECT_EQ(code_of([&] { resolve_weight_spec(task, {{}, {{"c", 1}}}); }), Errc::kUnknownDataset);
  EXPECT_EQ(code_of([&] { resolve_weight_spec(task, {{{"perf", -1}}, {}}); }),
            Errc::kNegativeWeight);
  EXPECT_EQ(code_of([&] { resolve_weight_spec(task, {{{"perf", 0}}, {}}); }), Errc::kZeroTotal);
}

TEST(RankLeaderboard, NliPublishedOrder) {
  const TaskConfig task = five_metric_task("nli");
  const auto records = published_records("nli");
  const auto board = rank_leaderboard(records, task, {});
  std::vector<std::string> ids;
  for (const auto& row : board.rows) ids.push_back(row.model_id);
  EXPECT_EQ(ids, testing::published_order("nli"));
  EXPECT_TRUE(board.warnings.empty());
  EXPECT_EQ(board.rows[0].rank, 1);
  EXPECT_DOUBLE_EQ(board.rows[0].raw_values.at("memory"), 5.71);
  for (const auto& [id, rate] : board.effective_exchange_rates) {
    EXPECT_DOUBLE_EQ(rate, board.exchange_rates.amrs(id)) << id;
  }
}

TEST(RankLeaderboard, SingleModelFallsBackToPerformance) {
  const TaskConfig task = five_metric_task("t");
  auto records = published_records("nli");
  records.resize(5);
  for (auto& r : records) r.task_id = "t";
  const auto board = rank_leaderboard(records, task, {});
  ASSERT_EQ(board.rows.size(), 1u);
  EXPECT_EQ(board.rows[0].rank, 1);
  EXPECT_DOUBLE_EQ(board.rows[0].dynascore, 69.54);
  EXPECT_FALSE(board.warnings.empty());
}

TEST(RankLeaderboard, UndefinedRateExcludedWithWarning) {
  const TaskConfig task = five_metric_task("nli");
  auto records = published_records("nli");
  for (auto& r : records) {
    if (r.metric_id == "memory") r.value = 4.0;
  }
  const auto board = rank_leaderboard(records, task, {});
  EXPECT_FALSE(board.exchange_rates.contains("memory"));
  ASSERT_EQ(board.warnings.size(), 1u);
  EXPECT_NE(board.warnings[0].find("memory"), std::string::npos);
  // Remaining weights renormalize: perf 0.5/0.875, others 0.125/0.875.
  const auto& top = board.rows[0];
  double expect = 0;
  for (const char* id : {"perf", "throughput", "fairness", "robustness"}) {
    const double w = (std::string(id) == "perf" ? 0.5 : 0.125) / 0.875;
    const double good = top.raw_values.at(id);
    expect += w * good / board.exchange_rates.amrs(id);
  }
  EXPECT_NEAR(top.dynascore, expect, 1e-9);
}

TEST(RankLeaderboard, IncompleteModelExcludedWithWarning) {
  const TaskConfig task = five_metric_task("nli");
  auto records = published_records("nli");
  records.pop_back();  // FastText loses its robustness record
  const auto board = rank_leaderboard(records, task, {});
  EXPECT_EQ(board.rows.size(), 6u);
  ASSERT_FALSE(board.warnings.empty());
  EXPECT_NE(board.warnings[0].find("nli-fasttext"), std::string::npos);
}

TEST(RankLeaderboard, NoModelsThrows) {
  EXPECT_EQ(code_of([] { rank_leaderboard({}, five_metric_task("t"), {}); }), Errc::kNoModels);
}

TEST(RankLeaderboard, SentimentThroughputMemoryWeightsPutFastTextAboveT5) {
  const TaskConfig task = five_metric_task("sentiment");
  const auto records = published_records("sentiment");
  const auto order = [&](const WeightSpec& w) {
    std::map<std::string, int> rank;
    for (const auto& row : rank_leaderboard(records, task, w).rows) rank[row.model_id] = row.rank;
    return rank;
  };
  auto defaults = order({});
  EXPECT_LT(defaults["sentiment-t5"], defaults["sentiment-fasttext"]);
  auto shifted = order({{{"perf", 1}, {"throughput", 1}, {"memory", 1}}, {}});
  EXPECT_LT(shifted["sentiment-fasttext"], shifted["sentiment-t5"]);
}

}  // namespace
}  // namespace dynaboard
