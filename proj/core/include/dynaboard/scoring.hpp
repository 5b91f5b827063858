#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dynaboard/timestamp.hpp"
#include "dynaboard/types.hpp"

namespace dynaboard {

struct RateEntry {
  double amrs = 1.0;           // units of the metric per unit of performance
  std::size_t pair_count = 0;  // MRS terms averaged

  friend bool operator==(const RateEntry&, const RateEntry&) = default;
};

// Exchange rates into performance units at one scoring instant. The
// performance metric always maps to 1.
struct ExchangeRateTable {
  std::map<std::string, RateEntry> rates;
  std::vector<std::string> model_ids;
  WeightSpec weight_spec;
  Timestamp computed_at{};

  // Throws kMissingRate.
  double amrs(const std::string& metric_id) const;
  bool contains(const std::string& metric_id) const { return rates.count(metric_id) != 0; }

  friend bool operator==(const ExchangeRateTable&, const ExchangeRateTable&) = default;
};

struct LeaderboardRow {
  std::string model_id;
  std::map<std::string, double> raw_values;  // natural units, pre-goods
  double dynascore = 0.0;
  double avg_zscore = 0.0;
  int rank = 0;

  friend bool operator==(const LeaderboardRow&, const LeaderboardRow&) = default;
};

struct Leaderboard {
  std::string task_id;
  std::vector<LeaderboardRow> rows;  // rank ascending
  ExchangeRateTable exchange_rates;
  // (w_default / z_user) * AMRS: the rate the user's weights effectively
  // apply under default weights. +inf where the user weight is 0.
  std::map<std::string, double> effective_exchange_rates;
  std::vector<std::string> warnings;
  WeightSpec weight_spec;  // as resolved (unnormalized)
  Timestamp timestamp{};
};

// Stable order used everywhere: performance descending, model_id ascending.
std::vector<ModelMetrics> sort_by_performance(std::span<const ModelMetrics> models,
                                              const std::string& perf_metric_id);

// |M(x_i) - M(x_i+1)| / (perf(x_i) - perf(x_i+1)) over consecutive pairs of
// `sorted` (perf descending). Pairs whose performance gap is below `epsilon`
// contribute nothing. Throws kTooFewModels when fewer than two models.
std::vector<double> mrs_set(std::span<const ModelMetrics> sorted,
                            const std::string& metric_id,
                            const std::string& perf_metric_id, double epsilon);

// Mean of the MRS set. Throws kEmptyMrsSet (all models perform the same) or
// kZeroAmrs (the metric never varies).
double amrs(std::span<const double> mrs);

// Rates for every metric in the task. Throws kTooFewModels, or the first
// kEmptyMrsSet / kZeroAmrs with the metric id as subject.
ExchangeRateTable exchange_rates(std::span<const ModelMetrics> models,
                                 const TaskConfig& task);

// sum_M weight(M) * value(M) / AMRS(M) over metrics with nonzero weight.
// `weights` must be normalized. Throws kMissingRate.
double dynascore(const ModelMetrics& model, const WeightMap& weights,
                 const ExchangeRateTable& rates);

// Weighted average of population z-scores over goods values. Zero-variance
// metrics contribute 0. Throws kTooFewModels.
std::map<std::string, double> avg_zscore(std::span<const ModelMetrics> models,
                                         const WeightMap& weights);

std::map<std::string, double> effective_exchange_rates(const WeightMap& default_normalized,
                                                       const WeightMap& user_normalized,
                                                       const ExchangeRateTable& rates);

// Fills empty maps with task defaults, treats absent ids as weight 0, and
// rejects ids outside the task (kUnknownMetric / kUnknownDataset) and
// negative weights (kNegativeWeight).
WeightSpec resolve_weight_spec(const TaskConfig& task, const WeightSpec& requested);

// Scoring of already-aggregated goods. Metrics whose AMRS is undefined are
// dropped with a warning and the remaining weights renormalized; a single
// model, or no scorable metric, falls back to performance only.
struct ScoredModels {
  std::map<std::string, double> dynascores;
  std::map<std::string, double> avg_zscores;
  ExchangeRateTable rates;
  WeightMap applied_weights;  // normalized weights actually used
  std::vector<std::string> order;  // model ids, best first
  std::vector<std::string> warnings;
};

ScoredModels score_models(std::span<const ModelMetrics> goods, const TaskConfig& task,
                          const WeightMap& normalized_metric_weights);

// End to end: resolve + normalize weights, aggregate datasets (incomplete
// models are excluded with a warning), score, sort, rank. Throws kNoModels.
Leaderboard rank_leaderboard(std::span<const MetricRecord> records, const TaskConfig& task,
                             const WeightSpec& weight_spec, Timestamp at = now_utc());

}  // namespace dynaboard
