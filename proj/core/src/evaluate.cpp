#include "dynaboard/evaluate.hpp"

#include <optional>
#include <set>
#include <unordered_set>

#include "dynaboard/error.hpp"

namespace dynaboard {

namespace {

struct MetricPlan {
  const MetricSpec* spec;
  const MetricEvaluator* evaluator;
};

std::vector<Perturbation> parse_kinds(const std::vector<std::string>& names, bool fairness) {
  std::vector<Perturbation> out;
  for (const auto& name : names) {
    Perturbation p = parse_perturbation(name);
    if (std::holds_alternative<FairnessKind>(p) != fairness) {
      throw Error(Errc::kValidationError,
                  "'" + name + "' is not a " + (fairness ? "fairness" : "robustness") +
                      " perturbation",
                  fairness ? "fairness_kinds" : "robustness_transforms");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::string> label_set(const TaskConfig& task, std::span<const GoldExample> golds) {
  if (!task.labels.empty()) return task.labels;
  std::set<std::string> seen;
  for (const auto& g : golds) {
    if (!g.gold.empty()) seen.insert(g.gold.front());
  }
  return {seen.begin(), seen.end()};
}

// Percent of perturbed examples whose prediction did not change; 100 when
// nothing could be perturbed.
double stability(ModelSession& session, const std::string& dataset_id,
                 const PerturbedDataset& perturbed, const RunReport& original,
                 const RunLimits& limits) {
  if (perturbed.examples.empty()) return 100.0;
  std::vector<GoldExample> inputs;
  std::unordered_set<std::string> uids;
  for (const auto& p : perturbed.examples) {
    inputs.push_back({p.uid, p.input, p.gold});
    uids.insert(p.uid);
  }
  const RunReport run = measure_run(session, dataset_id, inputs, limits);
  std::vector<Prediction> baseline;
  for (const auto& p : original.predictions) {
    if (uids.count(p.uid)) baseline.push_back(p);
  }
  return unchanged_fraction(baseline, run.predictions);
}

}  // namespace

TaskEvaluation evaluate_model_on_task(const ModelEntry& model, const TaskConfig& task,
                                      const DatasetMap& datasets,
                                      const FairnessLexicon& lexicon, std::uint64_t seed,
                                      const MetricRegistry& registry) {
  task.validate();
  model.validate();
  std::vector<MetricPlan> plan;
  bool wants_fairness = false;
  bool wants_robustness = false;
  for (const auto& spec : task.metrics) {
    const MetricEvaluator* ev = registry.find(spec.evaluator_key());
    if (!ev) {
      throw Error(Errc::kUnknownMetric,
                  "no evaluator '" + spec.evaluator_key() + "' for metric '" + spec.metric_id + "'",
                  spec.metric_id);
    }
    wants_fairness |= ev->kind == MetricKind::kFairness;
    wants_robustness |= ev->kind == MetricKind::kRobustness;
    plan.push_back({&spec, ev});
  }
  const auto fairness_kinds =
      wants_fairness ? parse_kinds(task.fairness_kinds, true) : std::vector<Perturbation>{};
  const auto robustness_kinds =
      wants_robustness ? parse_kinds(task.robustness_transforms, false) : std::vector<Perturbation>{};
  for (const auto& d : task.datasets) {
    auto it = datasets.find(d.dataset_id);
    if (it == datasets.end() || it->second.empty()) {
      throw Error(Errc::kEmptyDataset, "dataset '" + d.dataset_id + "' has no examples",
                  d.dataset_id);
    }
  }

  TaskEvaluation out;
  std::vector<MetricRecord> records;
  RunLock lock;
  ModelSession session(model, task.limits);
  for (const auto& d : task.datasets) {
    const auto& examples = datasets.at(d.dataset_id);
    try {
      DatasetEvaluation ev{d.dataset_id, measure_run(session, d.dataset_id, examples, task.limits),
                           {}, {}};
      std::optional<double> fairness;
      std::optional<double> robustness;
      if (wants_fairness) {
        const auto perturbed = perturb_dataset(examples, fairness_kinds, seed, lexicon);
        ev.fairness_skips = perturbed.skips;
        fairness = stability(session, d.dataset_id, perturbed, ev.scoring_run, task.limits);
      }
      if (wants_robustness) {
        const auto perturbed = perturb_dataset(examples, robustness_kinds, seed, lexicon);
        ev.robustness_skips = perturbed.skips;
        robustness = stability(session, d.dataset_id, perturbed, ev.scoring_run, task.limits);
      }
      const auto labels = label_set(task, examples);
      for (const auto& [spec, evaluator] : plan) {
        double value = 0.0;
        switch (evaluator->kind) {
          case MetricKind::kPerformance:
            value = evaluator->performance(ev.scoring_run.predictions, examples, labels);
            break;
          case MetricKind::kThroughput:
            value = ev.scoring_run.examples_per_second;
            break;
          case MetricKind::kMemory:
            value = ev.scoring_run.memory_avg_gib;
            break;
          case MetricKind::kFairness:
            value = *fairness;
            break;
          case MetricKind::kRobustness:
            value = *robustness;
            break;
        }
        records.push_back({task.task_id, model.model_id, d.dataset_id, spec->metric_id, value, {}});
      }
      out.datasets.push_back(std::move(ev));
    } catch (const Error& e) {
      throw Error(e.code(), "dataset '" + d.dataset_id + "': " + e.message(), d.dataset_id);
    }
  }
  const int status = session.close();
  if (!out.datasets.empty()) out.datasets.back().scoring_run.exit_status = status;
  const Timestamp at = now_utc();
  for (auto& r : records) r.measured_at = at;
  out.records = std::move(records);
  return out;
}

}  // namespace dynaboard
