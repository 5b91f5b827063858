#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dynaboard {

enum class PayloadKind { kLabel, kAnswerText };

struct Prediction {
  std::string uid;
  PayloadKind kind = PayloadKind::kLabel;
  std::string value;  // label or answer text, per `kind`

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct GoldExample {
  std::string uid;
  std::map<std::string, std::string> input;  // task-specific text fields
  // One label for classification; every acceptable answer for span tasks.
  std::vector<std::string> gold;

  friend bool operator==(const GoldExample&, const GoldExample&) = default;
};

// Percent of predictions whose label equals the gold label.
// Throws kEmptyDataset, kUidMismatch.
double accuracy(std::span<const Prediction> preds, std::span<const GoldExample> golds);

// Unweighted mean of per-label F1 over `label_set`, in percent. A label with
// zero precision and recall scores 0. Throws kEmptyDataset, kUidMismatch,
// kUnknownLabel (gold outside the label set; predictions outside it simply
// count as wrong).
double macro_f1(std::span<const Prediction> preds, std::span<const GoldExample> golds,
                std::span<const std::string> label_set);

// SQuAD-style answer normalization: lowercase, strip punctuation, drop the
// articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

// Best token-overlap F1 in [0, 1] against any gold answer.
double span_f1(std::string_view pred_answer, std::span<const std::string> gold_answers);

// Mean span_f1 over a dataset, in percent.
double mean_span_f1(std::span<const Prediction> preds, std::span<const GoldExample> golds);

// The five axes every metric belongs to.
enum class MetricKind { kPerformance, kThroughput, kMemory, kFairness, kRobustness };

using PerformanceFn = std::function<double(std::span<const Prediction>,
                                           std::span<const GoldExample>,
                                           std::span<const std::string> label_set)>;

struct MetricEvaluator {
  MetricKind kind = MetricKind::kPerformance;
  PerformanceFn performance;  // set only for kPerformance
};

// Evaluators keyed by metric id (or MetricSpec::evaluator). New performance
// metrics register here; scoring is unaffected.
class MetricRegistry {
 public:
  // accuracy, macro_f1, span_f1, throughput, memory, fairness, robustness.
  static MetricRegistry with_defaults();

  void add(const std::string& key, MetricEvaluator evaluator);
  const MetricEvaluator* find(const std::string& key) const;
  std::vector<std::string> keys() const;

 private:
  std::map<std::string, MetricEvaluator> evaluators_;
};

}  // namespace dynaboard
