#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "dynaboard/error.hpp"
#include "dynaboard/scoring.hpp"
#include "dynaboard/serialize.hpp"
#include "dynaboard/store.hpp"
#include "test_support.hpp"

namespace dynaboard {
namespace {

using testing::TempDir;

MetricRecord rec(const std::string& model, const std::string& metric, double value,
                 const std::string& task = "nli", const std::string& measured = "2026-01-15T00:00:00Z") {
  return {task, model, "scoring", metric, value, parse_iso8601(measured)};
}

std::vector<MetricRecord> ten_records() {
  std::vector<MetricRecord> out;
  for (int i = 0; i < 10; ++i) out.push_back(rec("m" + std::to_string(i % 2), "perf", i));
  return out;
}

TEST(Store, AppendToEmptyLog) {
  TempDir dir;
  Store store(dir.path());
  EXPECT_EQ(store.line_count(), 0u);
  EXPECT_TRUE(store.read_records().empty());
  EXPECT_EQ(store.append_records(ten_records()), 10u);
  EXPECT_EQ(store.line_count(), 10u);
  EXPECT_EQ(store.read_records(), ten_records());
}

TEST(Store, AppendNothingLeavesLogUnchanged) {
  TempDir dir;
  Store store(dir.path());
  store.append_records(ten_records());
  const std::string before = testing::read_file(dir / "results/records.jsonl");
  EXPECT_EQ(store.append_records({}), 10u);
  EXPECT_EQ(testing::read_file(dir / "results/records.jsonl"), before);
}

TEST(Store, NonFiniteValueRejectsWholeBatch) {
  TempDir dir;
  Store store(dir.path());
  store.append_records(ten_records());
  auto batch = ten_records();
  batch[7].value = std::numeric_limits<double>::infinity();
  try {
    store.append_records(batch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kValidationError);
    EXPECT_EQ(e.subject(), "value");
  }
  EXPECT_EQ(store.line_count(), 10u);
  batch[7].value = 1;
  batch[3].model_id.clear();
  EXPECT_THROW(store.append_records(batch), Error);
  EXPECT_EQ(store.line_count(), 10u);
}

TEST(Store, LatestRecordsLastWriteWins) {
  TempDir dir;
  Store store(dir.path());
  EXPECT_TRUE(store.latest_records("nli").empty());
  store.append_records(std::vector<MetricRecord>{rec("a", "perf", 1), rec("a", "perf", 2),
                                                 rec("x", "perf", 9, "qa")});
  const auto latest = store.latest_records("nli");
  ASSERT_EQ(latest.size(), 1u);
  EXPECT_DOUBLE_EQ(latest.begin()->second.value, 2);
  EXPECT_EQ(std::get<0>(latest.begin()->first), "a");
}

TEST(Store, LatestRecordsIndependentOfBatching) {
  TempDir one, many;
  Store a(one.path()), b(many.path());
  std::vector<MetricRecord> all;
  for (int i = 0; i < 30; ++i) all.push_back(rec("m" + std::to_string(i % 3), "perf", i));
  a.append_records(all);
  for (std::size_t i = 0; i < all.size(); i += 7) {
    b.append_records(std::span(all).subspan(i, std::min<std::size_t>(7, all.size() - i)));
  }
  EXPECT_EQ(records_of(a.latest_records("nli")), records_of(b.latest_records("nli")));
}

TEST(Store, LatestRecordsAsOf) {
  TempDir dir;
  Store store(dir.path());
  store.append_records(std::vector<MetricRecord>{
      rec("a", "perf", 1, "nli", "2026-01-01T00:00:00Z"),
      rec("a", "perf", 2, "nli", "2026-03-01T00:00:00Z")});
  const auto then = store.latest_records("nli", parse_iso8601("2026-02-01T00:00:00Z"));
  EXPECT_DOUBLE_EQ(then.begin()->second.value, 1);
  EXPECT_TRUE(store.latest_records("nli", parse_iso8601("2025-01-01T00:00:00Z")).empty());
}

TEST(Store, CorruptLogNamesLine) {
  TempDir dir;
  Store store(dir.path());
  store.append_records(ten_records());
  std::ofstream(dir / "results/records.jsonl", std::ios::app) << "{oops\n";
  try {
    store.read_records();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kParseError);
    EXPECT_EQ(e.subject(), "line 11");
  }
}

TEST(Store, ConcurrentAppendsNeverInterleave) {
  TempDir dir;
  Store store(dir.path());
  auto writer = [&](const std::string& model) {
    std::vector<MetricRecord> batch;
    for (int i = 0; i < 50; ++i) batch.push_back(rec(model, "perf", i));
    for (int k = 0; k < 10; ++k) store.append_records(batch);
  };
  std::thread t1(writer, "a"), t2(writer, "b");
  t1.join();
  t2.join();
  const auto all = store.read_records();
  ASSERT_EQ(all.size(), 1000u);
  for (std::size_t i = 0; i < all.size(); i += 50) {
    for (std::size_t j = 1; j < 50; ++j) EXPECT_EQ(all[i + j].model_id, all[i].model_id);
  }
}

TEST(Store, TasksModelsAndDatasets) {
  TempDir dir;
  Store empty(dir / "nothing");
  EXPECT_TRUE(empty.list_tasks().empty());
  EXPECT_TRUE(empty.list_models().empty());

  Store store(testing::copy_seed_store(dir));
  const auto tasks = store.list_tasks();
  ASSERT_EQ(tasks.size(), 4u);
  EXPECT_EQ(tasks[0].task_id, "hate_speech");
  EXPECT_EQ(store.load_task("nli").metrics.size(), 5u);
  EXPECT_THROW(store.load_task("../etc"), Error);
  try {
    store.load_task("vision");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotFound);
  }
  const auto data = store.load_datasets(store.load_task("sentiment"));
  EXPECT_GE(data.at("scoring").size(), 6u);

  ModelEntry m = testing::fixture_model("new-model", {});
  EXPECT_FALSE(store.has_model("new-model"));
  store.save_model(m);
  m.name = "renamed";
  store.save_model(m);
  EXPECT_EQ(store.load_model("new-model").name, "renamed");
  EXPECT_EQ(store.list_models().size(), 30u);
}

TEST(Store, SeededResultsMatchPublishedTable) {
  Store store(testing::kSeedData);
  for (const auto& [task_id, _] : testing::published_table()) {
    const auto latest = records_of(store.latest_records(task_id));
    auto expected = testing::published_records(task_id);
    ASSERT_EQ(latest.size(), expected.size()) << task_id;
    for (const auto& want : expected) {
      const auto it = std::find_if(latest.begin(), latest.end(), [&](const MetricRecord& r) {
        return r.model_id == want.model_id && r.metric_id == want.metric_id;
      });
      ASSERT_NE(it, latest.end()) << want.model_id << " " << want.metric_id;
      EXPECT_DOUBLE_EQ(it->value, want.value);
    }
  }
}

TEST(CheckId, AllowsFileSafeIdsOnly) {
  EXPECT_NO_THROW(check_id("nli-deberta_v1.2", "model_id"));
  for (const char* bad : {"", ".hidden", "a/b", "a b", "..", "é"}) {
    EXPECT_THROW(check_id(bad, "model_id"), Error) << bad;
  }
}

Leaderboard nli_board() {
  const auto records = testing::published_records("nli");
  return rank_leaderboard(records, testing::five_metric_task("nli"), {},
                          parse_iso8601("2026-02-01T12:00:00.250Z"));
}

TEST(Snapshot, RoundTripIsExact) {
  TempDir dir;
  Store store(dir.path());
  const TaskConfig task = testing::five_metric_task("nli");
  const Leaderboard board = nli_board();
  const auto path = store.snapshot_leaderboard(task, board);
  EXPECT_EQ(path.filename(), "2026-02-01T12-00-00.250Z.json");
  const Snapshot snap = Store::load_snapshot(path);
  EXPECT_EQ(snap.board.rows, board.rows);
  EXPECT_EQ(snap.board.exchange_rates, board.exchange_rates);
  EXPECT_EQ(snap.board.weight_spec, board.weight_spec);
  EXPECT_EQ(snap.board.timestamp, board.timestamp);
  EXPECT_EQ(Json(snap.task), Json(task));
  EXPECT_EQ(Json(snap.board.rows).dump(), Json(board.rows).dump());

  const auto second = store.snapshot_leaderboard(task, board);
  EXPECT_NE(second, path);
  EXPECT_EQ(testing::read_file(second), testing::read_file(path));
}

TEST(Snapshot, RescoringReproducesRanks) {
  TempDir dir;
  Store store(dir.path());
  const Leaderboard board = nli_board();
  const auto snap = Store::load_snapshot(
      store.snapshot_leaderboard(testing::five_metric_task("nli"), board));
  const auto rescored = rescore_snapshot(snap);
  std::vector<std::string> ids;
  for (const auto& row : board.rows) ids.push_back(row.model_id);
  EXPECT_EQ(rescored.order, ids);
  for (const auto& row : board.rows) {
    EXPECT_DOUBLE_EQ(rescored.dynascores.at(row.model_id), row.dynascore);
  }
}

TEST(Snapshot, RequiresRowsAndWeights) {
  TempDir dir;
  Store store(dir.path());
  const TaskConfig task = testing::five_metric_task("nli");
  Leaderboard no_weights = nli_board();
  no_weights.weight_spec = {};
  try {
    store.snapshot_leaderboard(task, no_weights);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kValidationError);
    EXPECT_EQ(e.subject(), "weight_spec");
  }
  Leaderboard no_rows = nli_board();
  no_rows.rows.clear();
  EXPECT_THROW(store.snapshot_leaderboard(task, no_rows), Error);
  EXPECT_FALSE(std::filesystem::exists(dir / "snapshots/nli"));
}

TEST(Snapshot, ConcurrentReaderNeverSeesTornFile) {
  TempDir dir;
  Store store(dir.path());
  const TaskConfig task = testing::five_metric_task("nli");
  const Leaderboard board = nli_board();
  store.snapshot_leaderboard(task, board);
  std::atomic<bool> done{false};
  std::atomic<int> loads{0};
  std::thread reader([&] {
    while (!done) {
      for (const auto& entry : std::filesystem::directory_iterator(dir / "snapshots/nli")) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_EQ(Store::load_snapshot(entry.path()).board.rows, board.rows);
        ++loads;
      }
    }
  });
  for (int i = 0; i < 40; ++i) store.snapshot_leaderboard(task, board);
  done = true;
  reader.join();
  EXPECT_GT(loads.load(), 0);
}

}  // namespace
}  // namespace dynaboard
