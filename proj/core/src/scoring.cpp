#include "dynaboard/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "dynaboard/aggregate.hpp"
#include "dynaboard/error.hpp"
#include "dynaboard/weights.hpp"

namespace dynaboard {

double ExchangeRateTable::amrs(const std::string& metric_id) const {
  auto it = rates.find(metric_id);
  if (it == rates.end()) {
    throw Error(Errc::kMissingRate, "no exchange rate for '" + metric_id + "'", metric_id);
  }
  return it->second.amrs;
}

std::vector<ModelMetrics> sort_by_performance(std::span<const ModelMetrics> models,
                                              const std::string& perf_metric_id) {
  std::vector<ModelMetrics> sorted(models.begin(), models.end());
  std::sort(sorted.begin(), sorted.end(),
            [&](const ModelMetrics& a, const ModelMetrics& b) {
              const double pa = a.at(perf_metric_id);
              const double pb = b.at(perf_metric_id);
              if (pa != pb) return pa > pb;
              return a.model_id < b.model_id;
            });
  return sorted;
}

std::vector<double> mrs_set(std::span<const ModelMetrics> sorted,
                            const std::string& metric_id,
                            const std::string& perf_metric_id, double epsilon) {
  if (sorted.size() < 2) {
    throw Error(Errc::kTooFewModels, "MRS needs at least two models", metric_id);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double gap = sorted[i].at(perf_metric_id) - sorted[i + 1].at(perf_metric_id);
    if (!(gap >= epsilon)) continue;
    const double delta = sorted[i].at(metric_id) - sorted[i + 1].at(metric_id);
    out.push_back(std::abs(delta / gap));
  }
  return out;
}

double amrs(std::span<const double> mrs) {
  if (mrs.empty()) {
    throw Error(Errc::kEmptyMrsSet,
                "all models perform the same; the exchange rate cannot be calculated");
  }
  const double mean =
      std::accumulate(mrs.begin(), mrs.end(), 0.0) / static_cast<double>(mrs.size());
  if (mean == 0.0) {
    throw Error(Errc::kZeroAmrs,
                "metric never varies between models; its converted value is undefined");
  }
  return mean;
}

namespace {

struct RateOutcome {
  std::optional<RateEntry> entry;
  std::optional<Error> failure;
};

// Rates for every metric, recording failures instead of throwing.
std::map<std::string, RateOutcome> compute_rates(std::span<const ModelMetrics> sorted,
                                                 const TaskConfig& task) {
  std::map<std::string, RateOutcome> out;
  const auto perf_terms = mrs_set(sorted, task.perf_metric_id, task.perf_metric_id,
                                  task.epsilon);
  const bool perf_defined = !perf_terms.empty();
  for (const auto& metric : task.metrics) {
    const std::string& id = metric.metric_id;
    RateOutcome outcome;
    if (!perf_defined) {
      outcome.failure = Error(Errc::kEmptyMrsSet,
                              "all models perform the same; exchange rate for '" + id +
                                  "' cannot be calculated",
                              id);
    } else if (id == task.perf_metric_id) {
      outcome.entry = RateEntry{1.0, perf_terms.size()};
    } else {
      const auto terms = mrs_set(sorted, id, task.perf_metric_id, task.epsilon);
      try {
        outcome.entry = RateEntry{amrs(terms), terms.size()};
      } catch (const Error& e) {
        outcome.failure = Error(e.code(), "metric '" + id + "': " + e.what(), id);
      }
    }
    out.emplace(id, std::move(outcome));
  }
  return out;
}

std::vector<std::string> model_ids_of(std::span<const ModelMetrics> models) {
  std::vector<std::string> ids;
  ids.reserve(models.size());
  for (const auto& m : models) ids.push_back(m.model_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

ExchangeRateTable exchange_rates(std::span<const ModelMetrics> models,
                                 const TaskConfig& task) {
  if (models.size() < 2) {
    throw Error(Errc::kTooFewModels, "exchange rates need at least two models");
  }
  const auto sorted = sort_by_performance(models, task.perf_metric_id);
  ExchangeRateTable table;
  table.model_ids = model_ids_of(models);
  table.computed_at = now_utc();
  // Report the performance failure first: it makes every other rate undefined.
  auto outcomes = compute_rates(sorted, task);
  if (auto& perf = outcomes.at(task.perf_metric_id); perf.failure) throw *perf.failure;
  for (const auto& metric : task.metrics) {
    auto& outcome = outcomes.at(metric.metric_id);
    if (outcome.failure) throw *outcome.failure;
    table.rates.emplace(metric.metric_id, *outcome.entry);
  }
  return table;
}

double dynascore(const ModelMetrics& model, const WeightMap& weights,
                 const ExchangeRateTable& rates) {
  double score = 0.0;
  for (const auto& [metric_id, w] : weights) {
    if (w == 0.0) continue;
    score += w * model.at(metric_id) / rates.amrs(metric_id);
  }
  return score;
}

std::map<std::string, double> avg_zscore(std::span<const ModelMetrics> models,
                                         const WeightMap& weights) {
  if (models.size() < 2) {
    throw Error(Errc::kTooFewModels, "z-scores need at least two models");
  }
  std::map<std::string, double> out;
  for (const auto& m : models) out.emplace(m.model_id, 0.0);
  const double n = static_cast<double>(models.size());
  for (const auto& [metric_id, w] : weights) {
    if (w == 0.0) continue;
    double mean = 0.0;
    for (const auto& m : models) mean += m.at(metric_id);
    mean /= n;
    double var = 0.0;
    for (const auto& m : models) {
      const double d = m.at(metric_id) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0)) continue;
    for (const auto& m : models) out[m.model_id] += w * (m.at(metric_id) - mean) / sd;
  }
  return out;
}

std::map<std::string, double> effective_exchange_rates(const WeightMap& default_normalized,
                                                       const WeightMap& user_normalized,
                                                       const ExchangeRateTable& rates) {
  std::map<std::string, double> out;
  for (const auto& [metric_id, entry] : rates.rates) {
    auto w = default_normalized.find(metric_id);
    auto z = user_normalized.find(metric_id);
    const double wv = w == default_normalized.end() ? 0.0 : w->second;
    const double zv = z == user_normalized.end() ? 0.0 : z->second;
    out.emplace(metric_id, zv == 0.0 ? std::numeric_limits<double>::infinity()
                                     : (wv / zv) * entry.amrs);
  }
  return out;
}

WeightSpec resolve_weight_spec(const TaskConfig& task, const WeightSpec& requested) {
  const WeightSpec defaults = default_weight_spec(task);
  WeightSpec out;
  if (requested.metric_weights.empty()) {
    out.metric_weights = defaults.metric_weights;
  } else {
    for (const auto& id : task.metric_ids()) out.metric_weights[id] = 0.0;
    for (const auto& [id, w] : requested.metric_weights) {
      if (!task.has_metric(id)) {
        throw Error(Errc::kUnknownMetric, "unknown metric '" + id + "'", id);
      }
      out.metric_weights[id] = w;
    }
  }
  if (requested.dataset_weights.empty()) {
    out.dataset_weights = defaults.dataset_weights;
  } else {
    for (const auto& d : task.datasets) out.dataset_weights[d.dataset_id] = 0.0;
    for (const auto& [id, w] : requested.dataset_weights) {
      if (!task.has_dataset(id)) {
        throw Error(Errc::kUnknownDataset, "unknown dataset '" + id + "'", id);
      }
      out.dataset_weights[id] = w;
    }
  }
  // Validates sign and totals of both maps.
  normalize_weights(out.metric_weights);
  normalize_weights(out.dataset_weights);
  return out;
}

ScoredModels score_models(std::span<const ModelMetrics> goods, const TaskConfig& task,
                          const WeightMap& normalized_metric_weights) {
  if (goods.empty()) throw Error(Errc::kNoModels, "no models to score");
  ScoredModels out;
  out.rates.model_ids = model_ids_of(goods);
  const auto sorted = sort_by_performance(goods, task.perf_metric_id);

  WeightMap applied;
  if (goods.size() < 2) {
    out.warnings.push_back(
        "only one model: exchange rates are undefined, scoring by performance only");
  } else {
    const auto outcomes = compute_rates(sorted, task);
    for (const auto& metric : task.metrics) {
      const auto& outcome = outcomes.at(metric.metric_id);
      if (outcome.entry) {
        out.rates.rates.emplace(metric.metric_id, *outcome.entry);
        continue;
      }
      if (metric.metric_id == task.perf_metric_id) {
        out.warnings.push_back(
            "all models perform the same: exchange rates are undefined, scoring by "
            "performance only");
        break;
      }
      out.warnings.push_back("metric '" + metric.metric_id +
                             "' excluded from the Dynascore: " + outcome.failure->what());
    }
    for (const auto& [id, w] : normalized_metric_weights) {
      if (w > 0.0 && out.rates.contains(id)) applied.emplace(id, w);
    }
  }
  const bool perf_only = applied.empty();
  if (perf_only) {
    if (goods.size() >= 2 && out.rates.contains(task.perf_metric_id)) {
      out.warnings.push_back(
          "no weighted metric has a defined exchange rate: scoring by performance only");
    }
    out.applied_weights = {{task.perf_metric_id, 1.0}};
    for (const auto& m : goods) out.dynascores.emplace(m.model_id, m.at(task.perf_metric_id));
  } else {
    out.applied_weights = normalize_weights(applied);
    for (const auto& m : goods) {
      out.dynascores.emplace(m.model_id, dynascore(m, out.applied_weights, out.rates));
    }
  }

  if (goods.size() >= 2) {
    out.avg_zscores = avg_zscore(goods, normalized_metric_weights);
  } else {
    for (const auto& m : goods) out.avg_zscores.emplace(m.model_id, 0.0);
  }

  out.order = out.rates.model_ids;
  std::sort(out.order.begin(), out.order.end(), [&](const std::string& a, const std::string& b) {
    const double da = out.dynascores.at(a);
    const double db = out.dynascores.at(b);
    if (da != db) return da > db;
    return a < b;
  });
  return out;
}

Leaderboard rank_leaderboard(std::span<const MetricRecord> records, const TaskConfig& task,
                             const WeightSpec& weight_spec, Timestamp at) {
  Leaderboard board;
  board.task_id = task.task_id;
  board.timestamp = at;
  board.weight_spec = resolve_weight_spec(task, weight_spec);
  const WeightMap metric_weights = normalize_weights(board.weight_spec.metric_weights);

  const auto raw = aggregate_raw(records, board.weight_spec.dataset_weights, task,
                                 /*drop_incomplete=*/true);
  for (const auto& gap : raw.incomplete) {
    board.warnings.push_back("model '" + gap.model_id + "' excluded: no record for dataset '" +
                             gap.dataset_id + "', metric '" + gap.metric_id + "'");
  }
  if (raw.models.empty()) {
    throw Error(Errc::kNoModels, "no model has complete results for task '" + task.task_id + "'",
                task.task_id);
  }
  const auto goods = to_goods(raw.models, task);
  auto scored = score_models(goods, task, metric_weights);
  board.warnings.insert(board.warnings.end(), scored.warnings.begin(), scored.warnings.end());

  board.exchange_rates = std::move(scored.rates);
  board.exchange_rates.weight_spec = board.weight_spec;
  board.exchange_rates.computed_at = at;
  board.effective_exchange_rates = effective_exchange_rates(
      normalize_weights(default_weights(task.metric_ids(), task.perf_metric_id)),
      metric_weights, board.exchange_rates);

  std::map<std::string, const RawModelValues*> raw_by_id;
  for (const auto& m : raw.models) raw_by_id.emplace(m.model_id, &m);
  int rank = 0;
  for (const auto& id : scored.order) {
    LeaderboardRow row;
    row.model_id = id;
    row.raw_values = raw_by_id.at(id)->values;
    row.dynascore = scored.dynascores.at(id);
    row.avg_zscore = scored.avg_zscores.at(id);
    row.rank = ++rank;
    board.rows.push_back(std::move(row));
  }
  return board;
}

}  // namespace dynaboard
