#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynaboard/error.hpp"
#include "dynaboard/metrics.hpp"
#include "dynaboard/perturb.hpp"
#include "dynaboard/scoring.hpp"
#include "dynaboard/types.hpp"

namespace dynaboard {

using Json = nlohmann::json;

// JSON mappings for the domain types. Doubles keep full precision; infinite
// values are written as null. Parsing failures throw kValidationError naming
// the offending field.
void to_json(Json& j, const MetricSpec& v);
void from_json(const Json& j, MetricSpec& v);
void to_json(Json& j, const DatasetRef& v);
void from_json(const Json& j, DatasetRef& v);
void to_json(Json& j, const RunLimits& v);
void from_json(const Json& j, RunLimits& v);
void to_json(Json& j, const TaskConfig& v);
void from_json(const Json& j, TaskConfig& v);  // also validates
void to_json(Json& j, const ModelEntry& v);
void from_json(const Json& j, ModelEntry& v);  // also validates
void to_json(Json& j, const MetricRecord& v);
void from_json(const Json& j, MetricRecord& v);
void to_json(Json& j, const WeightSpec& v);
void from_json(const Json& j, WeightSpec& v);
void to_json(Json& j, const Prediction& v);
void to_json(Json& j, const GoldExample& v);
void from_json(const Json& j, GoldExample& v);
void to_json(Json& j, const AppliedEdit& v);
void to_json(Json& j, const PerturbedExample& v);
void to_json(Json& j, const SkipReport& v);
void to_json(Json& j, const RateEntry& v);
void from_json(const Json& j, RateEntry& v);
void to_json(Json& j, const ExchangeRateTable& v);
void from_json(const Json& j, ExchangeRateTable& v);
void to_json(Json& j, const LeaderboardRow& v);
void from_json(const Json& j, LeaderboardRow& v);

// The scoring response document shared by the HTTP API and the CLI:
// {task_id, rows, exchange_rates, effective_exchange_rates, warnings,
//  weight_spec, timestamp, disclaimer}.
Json leaderboard_json(const Leaderboard& board);
extern const char* const kDynascoreDisclaimer;

struct ScoreRequest {
  WeightSpec weights;
  std::optional<Timestamp> as_of;
};
ScoreRequest parse_score_request(const Json& body);

Json error_json(const Error& e);

// Parses text, mapping syntax errors to kParseError.
Json parse_json(const std::string& text);

// Dataset JSONL: {"uid", "input": {...}, "gold": "label" | ["a", ...]}.
// Throws kParseError naming the 1-based line; blank lines are skipped.
std::vector<GoldExample> read_dataset(std::istream& in);
std::vector<GoldExample> read_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const std::vector<GoldExample>& examples);
void write_perturbed(std::ostream& out, const std::vector<PerturbedExample>& examples);

}  // namespace dynaboard
