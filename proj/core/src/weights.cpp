#include "dynaboard/weights.hpp"

#include <algorithm>
#include <cmath>

#include "dynaboard/error.hpp"

namespace dynaboard {

WeightMap normalize_weights(const WeightMap& raw) {
  if (raw.empty()) throw Error(Errc::kEmptyWeights, "no weights given");
  double total = 0.0;
  for (const auto& [id, w] : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(Errc::kNegativeWeight,
                  "weight for '" + id + "' must be a finite nonnegative number", id);
    }
    total += w;
  }
  if (total <= 0.0) throw Error(Errc::kZeroTotal, "weights sum to zero");
  WeightMap out;
  for (const auto& [id, w] : raw) out.emplace(id, w / total);
  return out;
}

WeightMap default_weights(const std::vector<std::string>& metric_ids,
                          const std::string& perf_metric_id) {
  if (std::find(metric_ids.begin(), metric_ids.end(), perf_metric_id) ==
      metric_ids.end()) {
    throw Error(Errc::kUnknownMetric,
                "performance metric '" + perf_metric_id + "' not in catalog",
                perf_metric_id);
  }
  WeightMap out;
  if (metric_ids.size() == 1) {
    out.emplace(perf_metric_id, 1.0);
    return out;
  }
  const double other = 0.5 / static_cast<double>(metric_ids.size() - 1);
  for (const auto& id : metric_ids) {
    out.emplace(id, id == perf_metric_id ? 0.5 : other);
  }
  return out;
}

}  // namespace dynaboard
