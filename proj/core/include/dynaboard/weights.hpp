#pragma once

#include <string>
#include <vector>

#include "dynaboard/types.hpp"

namespace dynaboard {

// Scales nonnegative weights to sum to 1.
// Throws kEmptyWeights, kNegativeWeight, or kZeroTotal.
WeightMap normalize_weights(const WeightMap& raw);

// Half the weight on the canonical performance metric, the rest split evenly
// among the other metrics. A single-metric task puts everything on perf.
WeightMap default_weights(const std::vector<std::string>& metric_ids,
                          const std::string& perf_metric_id);

}  // namespace dynaboard
