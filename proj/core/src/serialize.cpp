#include "dynaboard/serialize.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace dynaboard {

const char* const kDynascoreDisclaimer =
    "A Dynascore summarizes a model under one particular set of metric and dataset "
    "weights at one point in time. Rankings can change when the weights, the datasets, "
    "or the set of compared models change; report the weights and timestamp with any "
    "ranking you cite.";

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& field) {
  throw Error(Errc::kValidationError, message, field);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) invalid("expected a JSON object", name);
  auto it = j.find(name);
  if (it == j.end()) invalid(std::string("missing field '") + name + "'", name);
  return *it;
}

template <class T>
T convert(const Json& value, const std::string& name) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid("field '" + name + "' has the wrong type", name);
  }
}

template <class T>
T required(const Json& j, const char* name) {
  return convert<T>(field(j, name), name);
}

template <class T>
void optional_field(const Json& j, const char* name, T& out) {
  if (!j.is_object()) invalid("expected a JSON object", name);
  auto it = j.find(name);
  if (it != j.end() && !it->is_null()) out = convert<T>(*it, name);
}

double number(const Json& value, const std::string& name) {
  if (!value.is_number()) invalid("field '" + name + "' must be a number", name);
  return value.get<double>();
}

Timestamp timestamp_field(const Json& j, const char* name) {
  const auto text = required<std::string>(j, name);
  try {
    return parse_iso8601(text);
  } catch (const Error&) {
    invalid(std::string("field '") + name + "' is not an ISO-8601 UTC timestamp", name);
  }
}

WeightMap weight_map(const Json& j, const std::string& name) {
  if (!j.is_object()) invalid("field '" + name + "' must be an object", name);
  WeightMap out;
  for (const auto& [key, value] : j.items()) {
    out.emplace(key, number(value, name + "." + key));
  }
  return out;
}

Json gold_json(const std::vector<std::string>& gold) {
  if (gold.size() == 1) return gold.front();
  return gold;
}

Json double_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

void to_json(Json& j, const MetricSpec& v) {
  j = Json{{"metric_id", v.metric_id},
           {"unit", v.unit},
           {"direction", v.direction == Direction::kMaximize ? "maximize" : "minimize"}};
  if (v.cap) j["cap"] = *v.cap;
  if (!v.evaluator.empty()) j["evaluator"] = v.evaluator;
}

void from_json(const Json& j, MetricSpec& v) {
  v = MetricSpec{};
  v.metric_id = required<std::string>(j, "metric_id");
  optional_field(j, "unit", v.unit);
  std::string direction = "maximize";
  optional_field(j, "direction", direction);
  if (direction == "maximize") {
    v.direction = Direction::kMaximize;
  } else if (direction == "minimize") {
    v.direction = Direction::kMinimize;
  } else {
    invalid("direction must be 'maximize' or 'minimize'", "direction");
  }
  if (j.contains("cap") && !j.at("cap").is_null()) v.cap = number(j.at("cap"), "cap");
  optional_field(j, "evaluator", v.evaluator);
}

void to_json(Json& j, const DatasetRef& v) {
  j = Json{{"dataset_id", v.dataset_id}, {"path", v.path}, {"default_weight", v.default_weight}};
}

void from_json(const Json& j, DatasetRef& v) {
  v = DatasetRef{};
  v.dataset_id = required<std::string>(j, "dataset_id");
  optional_field(j, "path", v.path);
  if (j.contains("default_weight")) v.default_weight = number(j.at("default_weight"), "default_weight");
}

void to_json(Json& j, const RunLimits& v) {
  j = Json{{"example_timeout_seconds", v.example_timeout_seconds},
           {"memory_cap_gib", v.memory_cap_gib},
           {"handshake_timeout_seconds", v.handshake_timeout_seconds},
           {"sample_interval_seconds", v.sample_interval_seconds}};
}

void from_json(const Json& j, RunLimits& v) {
  v = RunLimits{};
  optional_field(j, "example_timeout_seconds", v.example_timeout_seconds);
  optional_field(j, "memory_cap_gib", v.memory_cap_gib);
  optional_field(j, "handshake_timeout_seconds", v.handshake_timeout_seconds);
  optional_field(j, "sample_interval_seconds", v.sample_interval_seconds);
  for (const double x : {v.example_timeout_seconds, v.memory_cap_gib,
                         v.handshake_timeout_seconds, v.sample_interval_seconds}) {
    if (!(x > 0.0) || !std::isfinite(x)) invalid("limits must be positive", "limits");
  }
}

void to_json(Json& j, const TaskConfig& v) {
  j = Json{{"task_id", v.task_id},
           {"name", v.name},
           {"perf_metric_id", v.perf_metric_id},
           {"metrics", v.metrics},
           {"datasets", v.datasets},
           {"epsilon", v.epsilon},
           {"labels", v.labels},
           {"fairness_kinds", v.fairness_kinds},
           {"robustness_transforms", v.robustness_transforms},
           {"limits", v.limits},
           {"default_weights", default_weight_spec(v)}};
}

void from_json(const Json& j, TaskConfig& v) {
  v = TaskConfig{};
  v.task_id = required<std::string>(j, "task_id");
  optional_field(j, "name", v.name);
  v.perf_metric_id = required<std::string>(j, "perf_metric_id");
  v.metrics = required<std::vector<MetricSpec>>(j, "metrics");
  v.datasets = required<std::vector<DatasetRef>>(j, "datasets");
  if (j.contains("epsilon")) v.epsilon = number(j.at("epsilon"), "epsilon");
  optional_field(j, "labels", v.labels);
  optional_field(j, "fairness_kinds", v.fairness_kinds);
  optional_field(j, "robustness_transforms", v.robustness_transforms);
  optional_field(j, "limits", v.limits);
  v.validate();
}

void to_json(Json& j, const ModelEntry& v) {
  j = Json{{"model_id", v.model_id}, {"name", v.name},         {"owner", v.owner},
           {"task_id", v.task_id},   {"exec_ref", v.exec_ref}, {"args", v.args},
           {"model_card", v.model_card}};
}

void from_json(const Json& j, ModelEntry& v) {
  v = ModelEntry{};
  v.model_id = required<std::string>(j, "model_id");
  optional_field(j, "name", v.name);
  optional_field(j, "owner", v.owner);
  v.task_id = required<std::string>(j, "task_id");
  v.exec_ref = required<std::string>(j, "exec_ref");
  optional_field(j, "args", v.args);
  optional_field(j, "model_card", v.model_card);
  v.validate();
}

void to_json(Json& j, const MetricRecord& v) {
  j = Json{{"task_id", v.task_id},       {"model_id", v.model_id},
           {"dataset_id", v.dataset_id}, {"metric_id", v.metric_id},
           {"value", double_or_null(v.value)},
           {"measured_at", format_iso8601(v.measured_at)}};
}

void from_json(const Json& j, MetricRecord& v) {
  v = MetricRecord{};
  v.task_id = required<std::string>(j, "task_id");
  v.model_id = required<std::string>(j, "model_id");
  v.dataset_id = required<std::string>(j, "dataset_id");
  v.metric_id = required<std::string>(j, "metric_id");
  v.value = number(field(j, "value"), "value");
  v.measured_at = timestamp_field(j, "measured_at");
}

void to_json(Json& j, const WeightSpec& v) {
  j = Json{{"metric_weights", v.metric_weights}, {"dataset_weights", v.dataset_weights}};
}

void from_json(const Json& j, WeightSpec& v) {
  v = WeightSpec{};
  if (j.contains("metric_weights")) v.metric_weights = weight_map(j.at("metric_weights"), "metric_weights");
  if (j.contains("dataset_weights")) v.dataset_weights = weight_map(j.at("dataset_weights"), "dataset_weights");
}

void to_json(Json& j, const Prediction& v) {
  j = Json{{"uid", v.uid}, {v.kind == PayloadKind::kLabel ? "label" : "answer_text", v.value}};
}

void to_json(Json& j, const GoldExample& v) {
  j = Json{{"uid", v.uid}, {"input", v.input}, {"gold", gold_json(v.gold)}};
}

void from_json(const Json& j, GoldExample& v) {
  v = GoldExample{};
  v.uid = required<std::string>(j, "uid");
  if (v.uid.empty()) invalid("uid must be non-empty", "uid");
  const Json& input = field(j, "input");
  if (!input.is_object()) invalid("input must be an object", "input");
  for (const auto& [key, value] : input.items()) {
    if (!value.is_string()) invalid("input field '" + key + "' must be a string", "input." + key);
    v.input.emplace(key, value.get<std::string>());
  }
  const Json& gold = field(j, "gold");
  if (gold.is_string()) {
    v.gold.push_back(gold.get<std::string>());
  } else {
    v.gold = convert<std::vector<std::string>>(gold, "gold");
    if (v.gold.empty()) invalid("gold must not be empty", "gold");
  }
}

void to_json(Json& j, const AppliedEdit& v) {
  j = Json{{"field", v.field},
           {"original", v.original},
           {"replacement", v.replacement},
           {"position", v.position}};
}

void to_json(Json& j, const PerturbedExample& v) {
  j = Json{{"uid", v.uid},
           {"input", v.input},
           {"gold", gold_json(v.gold)},
           {"kind", v.kind},
           {"applied_edits", v.applied_edits}};
}

void to_json(Json& j, const SkipReport& v) {
  j = Json{{"total", v.total},
           {"perturbed", v.perturbed},
           {"not_applicable", v.not_applicable},
           {"ner_skipped", v.ner_skipped}};
}

void to_json(Json& j, const RateEntry& v) {
  j = Json{{"amrs", v.amrs}, {"pair_count", v.pair_count}};
}

void from_json(const Json& j, RateEntry& v) {
  v.amrs = number(field(j, "amrs"), "amrs");
  v.pair_count = required<std::size_t>(j, "pair_count");
}

void to_json(Json& j, const ExchangeRateTable& v) {
  j = Json{{"rates", v.rates},
           {"model_ids", v.model_ids},
           {"weight_spec", v.weight_spec},
           {"computed_at", format_iso8601(v.computed_at)}};
}

void from_json(const Json& j, ExchangeRateTable& v) {
  v = ExchangeRateTable{};
  v.rates = required<std::map<std::string, RateEntry>>(j, "rates");
  v.model_ids = required<std::vector<std::string>>(j, "model_ids");
  v.weight_spec = required<WeightSpec>(j, "weight_spec");
  v.computed_at = timestamp_field(j, "computed_at");
}

void to_json(Json& j, const LeaderboardRow& v) {
  j = Json{{"model_id", v.model_id},
           {"rank", v.rank},
           {"dynascore", v.dynascore},
           {"avg_zscore", v.avg_zscore},
           {"raw_values", v.raw_values}};
}

void from_json(const Json& j, LeaderboardRow& v) {
  v = LeaderboardRow{};
  v.model_id = required<std::string>(j, "model_id");
  v.rank = required<int>(j, "rank");
  v.dynascore = number(field(j, "dynascore"), "dynascore");
  v.avg_zscore = number(field(j, "avg_zscore"), "avg_zscore");
  const Json& raw = field(j, "raw_values");
  if (!raw.is_object()) invalid("raw_values must be an object", "raw_values");
  for (const auto& [key, value] : raw.items()) v.raw_values.emplace(key, number(value, key));
}

Json leaderboard_json(const Leaderboard& board) {
  Json effective = Json::object();
  for (const auto& [id, rate] : board.effective_exchange_rates) {
    effective[id] = double_or_null(rate);
  }
  return Json{{"task_id", board.task_id},
              {"rows", board.rows},
              {"exchange_rates", board.exchange_rates},
              {"effective_exchange_rates", effective},
              {"warnings", board.warnings},
              {"weight_spec", board.weight_spec},
              {"timestamp", format_iso8601(board.timestamp)},
              {"disclaimer", kDynascoreDisclaimer}};
}

ScoreRequest parse_score_request(const Json& body) {
  if (body.is_null()) return {};
  if (!body.is_object()) invalid("request body must be a JSON object", "body");
  ScoreRequest req;
  req.weights = body.get<WeightSpec>();
  if (body.contains("as_of") && !body.at("as_of").is_null()) {
    req.as_of = timestamp_field(body, "as_of");
  }
  return req;
}

Json error_json(const Error& e) {
  Json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.subject().empty()) j["field"] = e.subject();
  return j;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kParseError, std::string("invalid JSON: ") + e.what());
  }
}

std::vector<GoldExample> read_dataset(std::istream& in) {
  std::vector<GoldExample> out;
  std::set<std::string> uids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      auto example = Json::parse(line).get<GoldExample>();
      if (!uids.insert(example.uid).second) {
        throw Error(Errc::kParseError, where + ": duplicate uid '" + example.uid + "'", where);
      }
      out.push_back(std::move(example));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, where + ": " + e.what(), where);
    } catch (const Error& e) {
      if (e.code() == Errc::kParseError) throw;
      throw Error(Errc::kParseError, where + ": " + e.what(), where);
    }
  }
  return out;
}

std::vector<GoldExample> read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open dataset '" + path + "'", path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<GoldExample>& examples) {
  for (const auto& e : examples) out << Json(e).dump() << '\n';
}

void write_perturbed(std::ostream& out, const std::vector<PerturbedExample>& examples) {
  for (const auto& e : examples) out << Json(e).dump() << '\n';
}

}  // namespace dynaboard
