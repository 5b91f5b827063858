#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynaboard/types.hpp"

namespace dynaboard {

// Maximize metrics pass through; minimize metrics become `cap - value`.
// Throws kMissingCap when a minimize spec has no cap, kCapExceeded when
// value > cap.
double to_good(double value, const MetricSpec& spec);

// Per-model dataset-weighted means in natural units (before goods conversion).
struct RawModelValues {
  std::string model_id;
  std::map<std::string, double> values;
};

struct MissingCellInfo {
  std::string model_id;
  std::string dataset_id;
  std::string metric_id;
};

struct RawAggregation {
  std::vector<RawModelValues> models;       // complete models, model_id order
  std::vector<MissingCellInfo> incomplete;  // first gap of each dropped model
};

// Weighted mean over datasets with nonzero weight. Datasets missing from
// `dataset_weights` count as weight 0; records for other tasks, metrics, or
// datasets outside the catalog are ignored. With `drop_incomplete` false the
// first gap throws kMissingCell; otherwise incomplete models are reported and
// skipped.
RawAggregation aggregate_raw(std::span<const MetricRecord> records,
                             const WeightMap& dataset_weights,
                             const TaskConfig& task, bool drop_incomplete = false);

// Explicit caps for minimize metrics, falling back to the maximum aggregated
// value across `models`.
std::map<std::string, double> resolve_caps(const TaskConfig& task,
                                           std::span<const RawModelValues> models);

std::vector<ModelMetrics> to_goods(std::span<const RawModelValues> models,
                                   const TaskConfig& task);

// aggregate_raw followed by to_goods.
std::vector<ModelMetrics> aggregate_datasets(std::span<const MetricRecord> records,
                                             const WeightMap& dataset_weights,
                                             const TaskConfig& task);

}  // namespace dynaboard
