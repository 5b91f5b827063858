#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dynaboard/evaluate.hpp"
#include "dynaboard/metrics.hpp"
#include "dynaboard/scoring.hpp"
#include "dynaboard/timestamp.hpp"
#include "dynaboard/types.hpp"

namespace dynaboard {

// (model_id, dataset_id, metric_id)
using CellKey = std::tuple<std::string, std::string, std::string>;
using LatestRecords = std::map<CellKey, MetricRecord>;

std::vector<MetricRecord> records_of(const LatestRecords& latest);

struct Snapshot {
  TaskConfig task;
  Leaderboard board;
};

// Flat-file store rooted at a directory:
//   tasks/<task_id>.json        task configs
//   datasets/<path>             dataset JSONL, paths taken from the task
//   models/<model_id>.json      model entries
//   results/records.jsonl       append-only metric records
//   snapshots/<task_id>/*.json  leaderboard snapshots
class Store {
 public:
  explicit Store(std::filesystem::path root);
  // $DYNA_DATA_DIR, else `fallback`.
  static Store from_env(const std::filesystem::path& fallback = "data");

  const std::filesystem::path& root() const noexcept { return root_; }

  // Sorted by task_id; empty when the store has no tasks. Throws kParseError.
  std::vector<TaskConfig> list_tasks() const;
  // Throws kNotFound, kParseError, kValidationError.
  TaskConfig load_task(const std::string& task_id) const;
  void save_task(const TaskConfig& task);

  std::vector<GoldExample> load_dataset(const DatasetRef& dataset) const;
  DatasetMap load_datasets(const TaskConfig& task) const;

  std::vector<ModelEntry> list_models() const;
  ModelEntry load_model(const std::string& model_id) const;
  bool has_model(const std::string& model_id) const;
  // Creates or replaces the entry for model.model_id.
  void save_model(const ModelEntry& model);

  // All records or none, written with one write and synced. Returns the new
  // line count. Throws kValidationError naming the field, kIoError.
  std::size_t append_records(std::span<const MetricRecord> records);
  // Every record in append order. Throws kParseError with the line number.
  std::vector<MetricRecord> read_records() const;
  std::size_t line_count() const;
  // Last appended record per cell for `task_id`, optionally only among
  // records measured at or before `as_of`.
  LatestRecords latest_records(const std::string& task_id,
                               std::optional<Timestamp> as_of = std::nullopt) const;

  // Writes snapshots/<task_id>/<timestamp>.json atomically and returns its
  // path. Throws kValidationError without rows or weights, kIoError.
  std::filesystem::path snapshot_leaderboard(const TaskConfig& task, const Leaderboard& board);
  static Snapshot load_snapshot(const std::filesystem::path& path);

 private:
  std::filesystem::path results_path() const;

  std::filesystem::path root_;
};

// Re-scores a snapshot from its own rows, task config, and weights.
ScoredModels rescore_snapshot(const Snapshot& snapshot);

// Ids become file names, so they are limited to [A-Za-z0-9_.-] and may not
// start with a dot. Throws kValidationError naming `field`.
void check_id(const std::string& id, const std::string& field);

}  // namespace dynaboard
