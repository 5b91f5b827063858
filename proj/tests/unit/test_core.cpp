#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dynaboard/aggregate.hpp"
#include "dynaboard/error.hpp"
#include "dynaboard/timestamp.hpp"
#include "dynaboard/types.hpp"
#include "dynaboard/weights.hpp"
#include "test_support.hpp"

namespace dynaboard {
namespace {

using testing::five_metric_task;

MetricRecord rec(const std::string& model, const std::string& dataset, const std::string& metric,
                 double value, const std::string& task = "t") {
  MetricRecord r;
  r.task_id = task;
  r.model_id = model;
  r.dataset_id = dataset;
  r.metric_id = metric;
  r.value = value;
  return r;
}

template <typename F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::kIoError;
}

TEST(NormalizeWeights, SymmetricPair) {
  const auto w = normalize_weights({{"perf", 5}, {"mem", 5}});
  EXPECT_DOUBLE_EQ(w.at("perf"), 0.5);
  EXPECT_DOUBLE_EQ(w.at("mem"), 0.5);
}

TEST(NormalizeWeights, SingleWeightIsOne) {
  EXPECT_DOUBLE_EQ(normalize_weights({{"a", 1}}).at("a"), 1.0);
}

TEST(NormalizeWeights, FourToOneSplit) {
  const auto w = normalize_weights({{"perf", 4}, {"t", 1}, {"m", 1}, {"f", 1}, {"r", 1}});
  EXPECT_DOUBLE_EQ(w.at("perf"), 0.5);
  for (const char* id : {"t", "m", "f", "r"}) EXPECT_DOUBLE_EQ(w.at(id), 0.125);
}

TEST(NormalizeWeights, Errors) {
  EXPECT_EQ(error_code_of([] { normalize_weights({}); }), Errc::kEmptyWeights);
  EXPECT_EQ(error_code_of([] { normalize_weights({{"a", 0}, {"b", 0}}); }), Errc::kZeroTotal);
  EXPECT_EQ(error_code_of([] { normalize_weights({{"a", -1}, {"b", 2}}); }),
            Errc::kNegativeWeight);
  EXPECT_EQ(error_code_of([] {
              normalize_weights({{"a", std::numeric_limits<double>::quiet_NaN()}});
            }),
            Errc::kNegativeWeight);
}

TEST(DefaultWeights, FiveMetrics) {
  const auto w = default_weights({"perf", "throughput", "memory", "fairness", "robustness"}, "perf");
  EXPECT_DOUBLE_EQ(w.at("perf"), 0.5);
  for (const char* id : {"throughput", "memory", "fairness", "robustness"}) {
    EXPECT_DOUBLE_EQ(w.at(id), 0.125);
  }
}

TEST(DefaultWeights, TwoAndOneMetric) {
  const auto two = default_weights({"perf", "memory"}, "perf");
  EXPECT_DOUBLE_EQ(two.at("perf"), 0.5);
  EXPECT_DOUBLE_EQ(two.at("memory"), 0.5);
  const auto one = default_weights({"perf"}, "perf");
  EXPECT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one.at("perf"), 1.0);
}

TEST(DefaultWeights, PerfMustBeInCatalog) {
  EXPECT_EQ(error_code_of([] { default_weights({"a"}, "perf"); }), Errc::kUnknownMetric);
}

TEST(ToGood, MaximizePassesThrough) {
  MetricSpec acc{"accuracy", "%", Direction::kMaximize, std::nullopt, ""};
  EXPECT_DOUBLE_EQ(to_good(69.54, acc), 69.54);
}

TEST(ToGood, MemoryUsedBecomesMemorySaved) {
  MetricSpec mem{"memory", "GiB", Direction::kMinimize, 16.0, ""};
  EXPECT_NEAR(to_good(5.71, mem), 10.29, 1e-12);
  EXPECT_DOUBLE_EQ(to_good(16.0, mem), 0.0);
}

TEST(ToGood, Errors) {
  MetricSpec uncapped{"memory", "GiB", Direction::kMinimize, std::nullopt, ""};
  EXPECT_EQ(error_code_of([&] { to_good(1.0, uncapped); }), Errc::kMissingCap);
  MetricSpec mem{"memory", "GiB", Direction::kMinimize, 16.0, ""};
  EXPECT_EQ(error_code_of([&] { to_good(16.5, mem); }), Errc::kCapExceeded);
}

TEST(AggregateDatasets, SingleDatasetIsIdentity) {
  TaskConfig task = five_metric_task("t");
  task.metrics.resize(1);
  const std::vector<MetricRecord> records{rec("m", "scoring", "perf", 80)};
  const auto out = aggregate_datasets(records, {{"scoring", 1}}, task);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].values.at("perf"), 80);
}

TEST(AggregateDatasets, SymmetricMean) {
  TaskConfig task = five_metric_task("t", {"a", "b"});
  task.metrics.resize(1);
  const std::vector<MetricRecord> records{rec("m", "a", "perf", 60), rec("m", "b", "perf", 80)};
  const auto out = aggregate_datasets(records, {{"a", 1}, {"b", 1}}, task);
  EXPECT_DOUBLE_EQ(out.at(0).values.at("perf"), 70);
}

TEST(AggregateDatasets, WeightedMemoryThenGoods) {
  TaskConfig task = five_metric_task("t", {"a", "b"});
  task.metrics = {task.metrics[0], task.metrics[2]};  // perf, memory
  const std::vector<MetricRecord> records{rec("m", "a", "perf", 50), rec("m", "b", "perf", 50),
                                          rec("m", "a", "memory", 4), rec("m", "b", "memory", 8)};
  const auto out = aggregate_datasets(records, {{"a", 3}, {"b", 1}}, task);
  // (3*4 + 1*8) / 4 = 5 used, 16 - 5 = 11 saved.
  EXPECT_DOUBLE_EQ(out.at(0).values.at("memory"), 11);
}

TEST(AggregateDatasets, ZeroWeightDatasetIgnoredAndNotRequired) {
  TaskConfig task = five_metric_task("t", {"a", "b"});
  task.metrics.resize(1);
  const std::vector<MetricRecord> records{rec("m", "a", "perf", 60)};
  const auto out = aggregate_datasets(records, {{"a", 1}, {"b", 0}}, task);
  EXPECT_DOUBLE_EQ(out.at(0).values.at("perf"), 60);
}

TEST(AggregateDatasets, MissingCellThrowsOrIsDropped) {
  TaskConfig task = five_metric_task("t", {"a", "b"});
  task.metrics.resize(1);
  const std::vector<MetricRecord> records{rec("m", "a", "perf", 60), rec("n", "a", "perf", 70),
                                          rec("n", "b", "perf", 70)};
  EXPECT_EQ(error_code_of([&] { aggregate_datasets(records, {{"a", 1}, {"b", 1}}, task); }),
            Errc::kMissingCell);
  const auto raw = aggregate_raw(records, {{"a", 1}, {"b", 1}}, task, true);
  ASSERT_EQ(raw.models.size(), 1u);
  EXPECT_EQ(raw.models[0].model_id, "n");
  ASSERT_EQ(raw.incomplete.size(), 1u);
  EXPECT_EQ(raw.incomplete[0].model_id, "m");
  EXPECT_EQ(raw.incomplete[0].dataset_id, "b");
}

TEST(AggregateDatasets, OtherTasksIgnoredUnknownDatasetRejected) {
  TaskConfig task = five_metric_task("t");
  task.metrics.resize(1);
  const std::vector<MetricRecord> records{rec("m", "scoring", "perf", 60),
                                          rec("x", "scoring", "perf", 10, "other")};
  const auto out = aggregate_datasets(records, {{"scoring", 1}}, task);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].model_id, "m");
  EXPECT_EQ(error_code_of([&] { aggregate_datasets(records, {{"nope", 1}}, task); }),
            Errc::kUnknownDataset);
}

TEST(AggregateDatasets, UncappedMinimizeUsesObservedMax) {
  TaskConfig task = five_metric_task("t");
  task.metrics = {task.metrics[0], task.metrics[2]};
  task.metrics[1].cap.reset();
  const std::vector<MetricRecord> records{rec("a", "scoring", "perf", 50),
                                          rec("a", "scoring", "memory", 2),
                                          rec("b", "scoring", "perf", 60),
                                          rec("b", "scoring", "memory", 6)};
  const auto out = aggregate_datasets(records, {{"scoring", 1}}, task);
  EXPECT_DOUBLE_EQ(out.at(0).values.at("memory"), 4);
  EXPECT_DOUBLE_EQ(out.at(1).values.at("memory"), 0);
}

TEST(TaskConfig, Validate) {
  TaskConfig ok = five_metric_task("t");
  EXPECT_NO_THROW(ok.validate());

  TaskConfig no_perf = ok;
  no_perf.perf_metric_id = "accuracy";
  EXPECT_EQ(error_code_of([&] { no_perf.validate(); }), Errc::kValidationError);

  TaskConfig dup = ok;
  dup.metrics.push_back(dup.metrics[1]);
  EXPECT_EQ(error_code_of([&] { dup.validate(); }), Errc::kValidationError);

  TaskConfig no_data = ok;
  no_data.datasets.clear();
  EXPECT_EQ(error_code_of([&] { no_data.validate(); }), Errc::kValidationError);

  TaskConfig bad_eps = ok;
  bad_eps.epsilon = 0;
  try {
    bad_eps.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.subject(), "epsilon");
  }
}

TEST(DefaultWeightSpec, TaskDefaults) {
  TaskConfig task = five_metric_task("t", {"a", "b"});
  task.datasets[1].default_weight = 3;
  const WeightSpec spec = default_weight_spec(task);
  EXPECT_DOUBLE_EQ(spec.metric_weights.at("perf"), 0.5);
  EXPECT_DOUBLE_EQ(spec.dataset_weights.at("b"), 3);
}

TEST(Timestamp, RoundTrip) {
  const Timestamp t = parse_iso8601("2026-10-16T11:05:00.123Z");
  EXPECT_EQ(format_iso8601(t), "2026-10-16T11:05:00.123Z");
  EXPECT_EQ(format_iso8601(parse_iso8601("2026-01-15T00:00:00Z")), "2026-01-15T00:00:00.000Z");
  const Timestamp now = now_utc();
  EXPECT_EQ(parse_iso8601(format_iso8601(now)), now);
}

TEST(Timestamp, RejectsNonUtcAndGarbage) {
  EXPECT_EQ(error_code_of([] { parse_iso8601("2026-10-16T11:05:00+02:00"); }), Errc::kParseError);
  EXPECT_EQ(error_code_of([] { parse_iso8601("yesterday"); }), Errc::kParseError);
}

TEST(Error, CarriesCodeSubjectAndName) {
  const Error e(Errc::kZeroAmrs, "metric never varies", "memory");
  EXPECT_EQ(e.code(), Errc::kZeroAmrs);
  EXPECT_EQ(e.subject(), "memory");
  EXPECT_EQ(e.message(), "metric never varies");
  EXPECT_NE(std::string(e.what()).find("ZeroAmrs"), std::string::npos);
  EXPECT_EQ(to_string(Errc::kNoModels), "NoModels");
}

}  // namespace
}  // namespace dynaboard
