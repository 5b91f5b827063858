#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dynaboard/lexicon.hpp"
#include "dynaboard/metrics.hpp"
#include "dynaboard/perturb.hpp"
#include "dynaboard/runner.hpp"
#include "dynaboard/types.hpp"

namespace dynaboard {

using DatasetMap = std::map<std::string, std::vector<GoldExample>>;

struct DatasetEvaluation {
  std::string dataset_id;
  RunReport scoring_run;
  SkipReport fairness_skips;
  SkipReport robustness_skips;
};

struct TaskEvaluation {
  std::vector<MetricRecord> records;  // one per (dataset, metric) cell
  std::vector<DatasetEvaluation> datasets;
};

// Runs one model process over every dataset of the task (and over the
// fairness and robustness counterparts the task's metrics need) and emits a
// record for every (dataset, metric) cell. A perturbation metric scores 100
// when no example of the dataset could be perturbed. Errors are rethrown
// with the dataset id as subject; nothing partial is returned.
TaskEvaluation evaluate_model_on_task(const ModelEntry& model, const TaskConfig& task,
                                      const DatasetMap& datasets,
                                      const FairnessLexicon& lexicon, std::uint64_t seed,
                                      const MetricRegistry& registry = MetricRegistry::with_defaults());

}  // namespace dynaboard
