#include "dynaboard/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "dynaboard/error.hpp"
#include "dynaboard/weights.hpp"

namespace dynaboard {

double to_good(double value, const MetricSpec& spec) {
  if (spec.direction == Direction::kMaximize) return value;
  if (!spec.cap) {
    throw Error(Errc::kMissingCap, "metric '" + spec.metric_id + "' has no cap",
                spec.metric_id);
  }
  if (value > *spec.cap) {
    throw Error(Errc::kCapExceeded,
                "value " + std::to_string(value) + " exceeds cap for '" +
                    spec.metric_id + "'",
                spec.metric_id);
  }
  return *spec.cap - value;
}

RawAggregation aggregate_raw(std::span<const MetricRecord> records,
                             const WeightMap& dataset_weights,
                             const TaskConfig& task, bool drop_incomplete) {
  WeightMap active;
  for (const auto& [id, w] : dataset_weights) {
    if (!task.has_dataset(id)) {
      throw Error(Errc::kUnknownDataset, "unknown dataset '" + id + "'", id);
    }
    active.emplace(id, w);
  }
  const WeightMap normalized = normalize_weights(active);

  using Cell = std::tuple<std::string, std::string, std::string>;
  std::map<Cell, double> cells;
  std::set<std::string> model_ids;
  for (const auto& r : records) {
    if (!r.task_id.empty() && r.task_id != task.task_id) continue;
    if (!task.has_metric(r.metric_id) || !task.has_dataset(r.dataset_id)) continue;
    if (!std::isfinite(r.value)) {
      throw Error(Errc::kValidationError,
                  "non-finite value for " + r.model_id + "/" + r.dataset_id + "/" +
                      r.metric_id,
                  "value");
    }
    auto [it, inserted] = cells.emplace(Cell{r.model_id, r.dataset_id, r.metric_id}, r.value);
    if (!inserted) {
      throw Error(Errc::kValidationError,
                  "duplicate record for " + r.model_id + "/" + r.dataset_id + "/" +
                      r.metric_id + "; deduplicate with latest_records first",
                  r.model_id);
    }
    model_ids.insert(r.model_id);
  }

  RawAggregation out;
  for (const auto& model_id : model_ids) {
    RawModelValues row{model_id, {}};
    std::optional<MissingCellInfo> gap;
    for (const auto& metric : task.metrics) {
      double acc = 0.0;
      for (const auto& ds : task.datasets) {
        auto w = normalized.find(ds.dataset_id);
        if (w == normalized.end() || w->second == 0.0) continue;
        auto cell = cells.find(Cell{model_id, ds.dataset_id, metric.metric_id});
        if (cell == cells.end()) {
          gap = MissingCellInfo{model_id, ds.dataset_id, metric.metric_id};
          break;
        }
        acc += w->second * cell->second;
      }
      if (gap) break;
      row.values.emplace(metric.metric_id, acc);
    }
    if (gap) {
      if (!drop_incomplete) {
        throw Error(Errc::kMissingCell,
                    "no record for model '" + gap->model_id + "', dataset '" +
                        gap->dataset_id + "', metric '" + gap->metric_id + "'",
                    gap->model_id);
      }
      out.incomplete.push_back(*gap);
      continue;
    }
    out.models.push_back(std::move(row));
  }
  return out;
}

std::map<std::string, double> resolve_caps(const TaskConfig& task,
                                           std::span<const RawModelValues> models) {
  std::map<std::string, double> caps;
  for (const auto& metric : task.metrics) {
    if (metric.direction != Direction::kMinimize) continue;
    if (metric.cap) {
      caps.emplace(metric.metric_id, *metric.cap);
      continue;
    }
    std::optional<double> best;
    for (const auto& m : models) {
      auto it = m.values.find(metric.metric_id);
      if (it != m.values.end() && (!best || it->second > *best)) best = it->second;
    }
    if (best) caps.emplace(metric.metric_id, *best);
  }
  return caps;
}

std::vector<ModelMetrics> to_goods(std::span<const RawModelValues> models,
                                   const TaskConfig& task) {
  const auto caps = resolve_caps(task, models);
  std::vector<ModelMetrics> out;
  out.reserve(models.size());
  for (const auto& m : models) {
    ModelMetrics goods{m.model_id, {}};
    for (const auto& [metric_id, value] : m.values) {
      MetricSpec spec = task.metric(metric_id);
      if (auto cap = caps.find(metric_id); cap != caps.end()) spec.cap = cap->second;
      goods.values.emplace(metric_id, to_good(value, spec));
    }
    out.push_back(std::move(goods));
  }
  return out;
}

std::vector<ModelMetrics> aggregate_datasets(std::span<const MetricRecord> records,
                                             const WeightMap& dataset_weights,
                                             const TaskConfig& task) {
  const auto raw = aggregate_raw(records, dataset_weights, task);
  return to_goods(raw.models, task);
}

}  // namespace dynaboard
