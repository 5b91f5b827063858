#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynaboard/timestamp.hpp"

namespace dynaboard {

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr double kDefaultMemoryCapGiB = 16.0;
inline constexpr double kDefaultExampleTimeoutSeconds = 30.0;

using WeightMap = std::map<std::string, double>;

enum class Direction { kMaximize, kMinimize };

struct MetricSpec {
  std::string metric_id;
  std::string unit;
  Direction direction = Direction::kMaximize;
  // Budget cap for minimize metrics. When absent, the maximum value across
  // the models being scored is used.
  std::optional<double> cap;
  // Registry key used to compute the metric during evaluation; defaults to
  // metric_id when empty.
  std::string evaluator;

  const std::string& evaluator_key() const {
    return evaluator.empty() ? metric_id : evaluator;
  }
};

struct DatasetRef {
  std::string dataset_id;
  std::string path;  // relative to the store's datasets/ directory
  double default_weight = 1.0;
};

// Enforcement limits applied while a model runs.
struct RunLimits {
  double example_timeout_seconds = kDefaultExampleTimeoutSeconds;
  double memory_cap_gib = kDefaultMemoryCapGiB;
  double handshake_timeout_seconds = 60.0;
  double sample_interval_seconds = 0.1;
};

struct TaskConfig {
  std::string task_id;
  std::string name;
  std::string perf_metric_id;
  std::vector<MetricSpec> metrics;
  std::vector<DatasetRef> datasets;
  double epsilon = kDefaultEpsilon;

  // Evaluation settings; not needed for scoring.
  std::vector<std::string> labels;  // label set for classification metrics
  std::vector<std::string> fairness_kinds = {"race", "gender"};
  std::vector<std::string> robustness_transforms = {
      "contraction", "keyboard", "ocr", "punctuation",
      "spelling_error", "typos", "word_case"};
  RunLimits limits;

  // Throws Error(kValidationError) naming the violated invariant.
  void validate() const;

  const MetricSpec& metric(const std::string& metric_id) const;
  bool has_metric(const std::string& metric_id) const;
  bool has_dataset(const std::string& dataset_id) const;
  std::vector<std::string> metric_ids() const;
};

struct ModelEntry {
  std::string model_id;
  std::string name;
  std::string owner;
  std::string task_id;
  std::string exec_ref;
  std::vector<std::string> args;
  std::map<std::string, std::string> model_card;

  void validate() const;
};

struct MetricRecord {
  std::string task_id;
  std::string model_id;
  std::string dataset_id;
  std::string metric_id;
  double value = 0.0;
  Timestamp measured_at{};

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct WeightSpec {
  WeightMap metric_weights;
  WeightMap dataset_weights;

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

// A model as a point in the space of goods: dataset-aggregated values with
// minimize metrics already converted.
struct ModelMetrics {
  std::string model_id;
  std::map<std::string, double> values;

  double at(const std::string& metric_id) const;
};

// Task-level default weights: metric defaults and per-dataset defaults.
WeightSpec default_weight_spec(const TaskConfig& task);

}  // namespace dynaboard
