#include "dynaboard/types.hpp"

#include <cmath>
#include <set>

#include "dynaboard/error.hpp"
#include "dynaboard/weights.hpp"

namespace dynaboard {

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& field) {
  throw Error(Errc::kValidationError, message, field);
}

}  // namespace

void TaskConfig::validate() const {
  if (task_id.empty()) invalid("task_id must be non-empty", "task_id");
  std::set<std::string> seen;
  int perf_hits = 0;
  for (const auto& m : metrics) {
    if (m.metric_id.empty()) invalid("metric_id must be non-empty", "metrics");
    if (!seen.insert(m.metric_id).second) {
      invalid("duplicate metric id '" + m.metric_id + "'", "metrics");
    }
    if (m.metric_id == perf_metric_id) ++perf_hits;
    if (m.cap && !(*m.cap > 0.0)) {
      invalid("cap for '" + m.metric_id + "' must be positive", "metrics");
    }
  }
  if (perf_hits != 1) {
    invalid("perf_metric_id '" + perf_metric_id + "' must appear exactly once in metrics",
            "perf_metric_id");
  }
  if (metric(perf_metric_id).direction != Direction::kMaximize) {
    invalid("the performance metric must be maximized", "perf_metric_id");
  }
  if (datasets.empty()) invalid("at least one dataset is required", "datasets");
  std::set<std::string> ds;
  for (const auto& d : datasets) {
    if (d.dataset_id.empty()) invalid("dataset_id must be non-empty", "datasets");
    if (!ds.insert(d.dataset_id).second) {
      invalid("duplicate dataset id '" + d.dataset_id + "'", "datasets");
    }
    if (!(d.default_weight >= 0.0)) {
      invalid("dataset weight must be nonnegative", "datasets");
    }
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    invalid("epsilon must be positive", "epsilon");
  }
}

const MetricSpec& TaskConfig::metric(const std::string& metric_id) const {
  for (const auto& m : metrics) {
    if (m.metric_id == metric_id) return m;
  }
  throw Error(Errc::kUnknownMetric, "unknown metric '" + metric_id + "'", metric_id);
}

bool TaskConfig::has_metric(const std::string& metric_id) const {
  for (const auto& m : metrics) {
    if (m.metric_id == metric_id) return true;
  }
  return false;
}

bool TaskConfig::has_dataset(const std::string& dataset_id) const {
  for (const auto& d : datasets) {
    if (d.dataset_id == dataset_id) return true;
  }
  return false;
}

std::vector<std::string> TaskConfig::metric_ids() const {
  std::vector<std::string> ids;
  ids.reserve(metrics.size());
  for (const auto& m : metrics) ids.push_back(m.metric_id);
  return ids;
}

void ModelEntry::validate() const {
  if (model_id.empty()) invalid("model_id must be non-empty", "model_id");
  if (exec_ref.empty()) invalid("exec_ref must be non-empty", "exec_ref");
  if (task_id.empty()) invalid("task_id must be non-empty", "task_id");
}

double ModelMetrics::at(const std::string& metric_id) const {
  auto it = values.find(metric_id);
  if (it == values.end()) {
    throw Error(Errc::kUnknownMetric,
                "model '" + model_id + "' has no value for '" + metric_id + "'",
                metric_id);
  }
  return it->second;
}

WeightSpec default_weight_spec(const TaskConfig& task) {
  WeightSpec spec;
  spec.metric_weights = default_weights(task.metric_ids(), task.perf_metric_id);
  for (const auto& d : task.datasets) {
    spec.dataset_weights.emplace(d.dataset_id, d.default_weight);
  }
  return spec;
}

}  // namespace dynaboard
