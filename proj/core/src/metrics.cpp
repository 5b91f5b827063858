#include "dynaboard/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dynaboard/error.hpp"

namespace dynaboard {

namespace {

// Pairs each gold example with its prediction by uid.
std::vector<std::pair<const GoldExample*, const Prediction*>> join_by_uid(
    std::span<const Prediction> preds, std::span<const GoldExample> golds) {
  if (golds.empty()) throw Error(Errc::kEmptyDataset, "no examples to score");
  std::unordered_map<std::string, const Prediction*> by_uid;
  for (const auto& p : preds) {
    if (!by_uid.emplace(p.uid, &p).second) {
      throw Error(Errc::kUidMismatch, "duplicate prediction uid '" + p.uid + "'", p.uid);
    }
  }
  std::vector<std::pair<const GoldExample*, const Prediction*>> out;
  out.reserve(golds.size());
  for (const auto& g : golds) {
    auto it = by_uid.find(g.uid);
    if (it == by_uid.end()) {
      throw Error(Errc::kUidMismatch, "no prediction for uid '" + g.uid + "'", g.uid);
    }
    if (g.gold.empty()) {
      throw Error(Errc::kValidationError, "example '" + g.uid + "' has no gold", g.uid);
    }
    out.emplace_back(&g, it->second);
  }
  if (preds.size() != golds.size()) {
    std::set<std::string> gold_uids;
    for (const auto& g : golds) gold_uids.insert(g.uid);
    for (const auto& p : preds) {
      if (!gold_uids.count(p.uid)) {
        throw Error(Errc::kUidMismatch, "prediction for unknown uid '" + p.uid + "'", p.uid);
      }
    }
  }
  return out;
}

std::vector<std::string> tokens_of(std::string_view normalized) {
  std::vector<std::string> out;
  std::istringstream in{std::string(normalized)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

double accuracy(std::span<const Prediction> preds, std::span<const GoldExample> golds) {
  const auto pairs = join_by_uid(preds, golds);
  std::size_t hits = 0;
  for (const auto& [g, p] : pairs) {
    if (p->value == g->gold.front()) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double macro_f1(std::span<const Prediction> preds, std::span<const GoldExample> golds,
                std::span<const std::string> label_set) {
  if (label_set.empty()) {
    throw Error(Errc::kValidationError, "label set must be non-empty", "labels");
  }
  const auto pairs = join_by_uid(preds, golds);
  std::map<std::string, std::size_t> tp, fp, fn;
  for (const auto& label : label_set) tp[label] = fp[label] = fn[label] = 0;
  for (const auto& [g, p] : pairs) {
    const std::string& gold = g->gold.front();
    if (!tp.count(gold)) {
      throw Error(Errc::kUnknownLabel, "gold label '" + gold + "' not in label set", gold);
    }
    if (p->value == gold) {
      ++tp[gold];
    } else {
      ++fn[gold];
      if (fp.count(p->value)) ++fp[p->value];
    }
  }
  double sum = 0.0;
  for (const auto& label : label_set) {
    const double t = static_cast<double>(tp[label]);
    const double denom = 2.0 * t + static_cast<double>(fp[label] + fn[label]);
    sum += denom == 0.0 ? 0.0 : 2.0 * t / denom;
  }
  return 100.0 * sum / static_cast<double>(label_set.size());
}

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    lowered.push_back(static_cast<char>(std::tolower(c)));
  }
  std::string out;
  for (const auto& tok : tokens_of(lowered)) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

double span_f1(std::string_view pred_answer, std::span<const std::string> gold_answers) {
  const auto pred_tokens = tokens_of(normalize_answer(pred_answer));
  double best = 0.0;
  for (const auto& gold : gold_answers) {
    const auto gold_tokens = tokens_of(normalize_answer(gold));
    if (pred_tokens.empty() || gold_tokens.empty()) {
      best = std::max(best, pred_tokens.empty() && gold_tokens.empty() ? 1.0 : 0.0);
      continue;
    }
    std::map<std::string, int> counts;
    for (const auto& t : gold_tokens) ++counts[t];
    int common = 0;
    for (const auto& t : pred_tokens) {
      if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
        --it->second;
        ++common;
      }
    }
    if (common == 0) continue;
    const double precision = static_cast<double>(common) / static_cast<double>(pred_tokens.size());
    const double recall = static_cast<double>(common) / static_cast<double>(gold_tokens.size());
    best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

double mean_span_f1(std::span<const Prediction> preds, std::span<const GoldExample> golds) {
  const auto pairs = join_by_uid(preds, golds);
  double sum = 0.0;
  for (const auto& [g, p] : pairs) sum += span_f1(p->value, g->gold);
  return 100.0 * sum / static_cast<double>(pairs.size());
}

MetricRegistry MetricRegistry::with_defaults() {
  MetricRegistry r;
  r.add("accuracy", {MetricKind::kPerformance,
                     [](auto preds, auto golds, auto) { return accuracy(preds, golds); }});
  r.add("macro_f1", {MetricKind::kPerformance, [](auto preds, auto golds, auto labels) {
                       return macro_f1(preds, golds, labels);
                     }});
  r.add("span_f1", {MetricKind::kPerformance,
                    [](auto preds, auto golds, auto) { return mean_span_f1(preds, golds); }});
  r.add("throughput", {MetricKind::kThroughput, {}});
  r.add("memory", {MetricKind::kMemory, {}});
  r.add("fairness", {MetricKind::kFairness, {}});
  r.add("robustness", {MetricKind::kRobustness, {}});
  return r;
}

void MetricRegistry::add(const std::string& key, MetricEvaluator evaluator) {
  evaluators_.insert_or_assign(key, std::move(evaluator));
}

const MetricEvaluator* MetricRegistry::find(const std::string& key) const {
  auto it = evaluators_.find(key);
  return it == evaluators_.end() ? nullptr : &it->second;
}

std::vector<std::string> MetricRegistry::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : evaluators_) out.push_back(k);
  return out;
}

}  // namespace dynaboard
