#include "dynaboard/server.hpp"

#include <unistd.h>

#include <filesystem>
#include <vector>

#include <httplib.h>

namespace dynaboard {

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string::npos ? path.size() : j;
    if (end > i) parts.push_back(path.substr(i, end - i));
    i = end + 1;
  }
  return parts;
}

ApiResponse failure(const Error& e) { return {http_status(e.code()), error_json(e)}; }

ApiResponse not_found(const std::string& what) {
  return failure(Error(Errc::kNotFound, what));
}

Json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return nullptr;
  return parse_json(body);
}

Json job_json(const JobStatus& s) {
  Json j{{"job_id", s.job_id},
         {"model_id", s.model_id},
         {"task_id", s.task_id},
         {"state", std::string(to_string(s.state))},
         {"records", s.records},
         {"created_at", format_iso8601(s.created_at)}};
  if (s.state == JobState::kFailed) j["reason"] = s.reason;
  if (s.started_at) j["started_at"] = format_iso8601(*s.started_at);
  if (s.finished_at) j["finished_at"] = format_iso8601(*s.finished_at);
  return j;
}

void check_executable(const ModelEntry& model) {
  if (model.exec_ref.find('/') == std::string::npos) return;  // resolved on PATH at start
  if (::access(model.exec_ref.c_str(), X_OK) != 0) {
    throw Error(Errc::kValidationError,
                "exec_ref '" + model.exec_ref + "' is not an executable file", "exec_ref");
  }
}

}  // namespace

Leaderboard score_task(const Store& store, const TaskConfig& task, const ScoreRequest& request,
                       Timestamp at) {
  const auto records = records_of(store.latest_records(task.task_id, request.as_of));
  return rank_leaderboard(records, task, request.weights, at);
}

TaskEvaluation evaluate_and_commit(Store& store, const ModelEntry& model, const TaskConfig& task,
                                   std::uint64_t seed, const FairnessLexicon& lexicon) {
  const auto datasets = store.load_datasets(task);
  TaskEvaluation result = evaluate_model_on_task(model, task, datasets, lexicon, seed);
  store.append_records(result.records);
  return result;
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::kNotFound:
      return 404;
    case Errc::kEmptyWeights:
    case Errc::kZeroTotal:
    case Errc::kNegativeWeight:
    case Errc::kUnknownMetric:
    case Errc::kUnknownDataset:
    case Errc::kValidationError:
    case Errc::kParseError:
    case Errc::kEmptyDataset:
      return 400;
    case Errc::kNoModels:
      return 409;
    case Errc::kSpawnFailed:
    case Errc::kModelCrashed:
    case Errc::kProtocolViolation:
    case Errc::kProcessGone:
    case Errc::kMemoryLimitExceeded:
      return 503;
    case Errc::kTimeout:
      return 504;
    default:
      return 500;
  }
}

Api::Api(Store store, std::uint64_t seed)
    : store_(std::move(store)),
      seed_(seed),
      jobs_([this](const std::string& model_id, const std::string& task_id) {
        const ModelEntry model = store_.load_model(model_id);
        const TaskConfig task = store_.load_task(task_id);
        return evaluate_and_commit(store_, model, task, seed_).records.size();
      }) {}

ApiResponse Api::handle(const std::string& method, const std::string& path,
                        const std::string& body) {
  try {
    return route(method, path, body);
  } catch (const Error& e) {
    return failure(e);
  } catch (const std::exception& e) {
    return {500, Json{{"code", "InternalError"}, {"message", e.what()}}};
  }
}

ApiResponse Api::route(const std::string& method, const std::string& path,
                       const std::string& body) {
  const auto parts = split_path(path);
  if (parts.size() < 2 || parts[0] != "api") return not_found("no route for " + path);
  const std::string& collection = parts[1];
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (collection == "tasks") {
    if (parts.size() == 2 && get) {
      Json out = Json::array();
      for (const auto& task : store_.list_tasks()) out.push_back(task);
      return {200, out};
    }
    if (parts.size() == 3 && get) return {200, store_.load_task(parts[2])};
    if (parts.size() == 4 && parts[3] == "leaderboard" && get) {
      const TaskConfig task = store_.load_task(parts[2]);
      return {200, leaderboard_json(score_task(store_, task, ScoreRequest{}))};
    }
    if (parts.size() == 4 && parts[3] == "score" && post) {
      const TaskConfig task = store_.load_task(parts[2]);
      const ScoreRequest request = parse_score_request(parse_body(body));
      return {200, leaderboard_json(score_task(store_, task, request))};
    }
  } else if (collection == "models") {
    if (parts.size() == 2 && get) {
      Json out = Json::array();
      for (const auto& model : store_.list_models()) out.push_back(model);
      return {200, out};
    }
    if (parts.size() == 2 && post) return submit_model(parse_body(body));
    if (parts.size() == 3 && get) return {200, store_.load_model(parts[2])};
    if (parts.size() == 4 && parts[3] == "predict" && post) {
      return predict(parts[2], parse_body(body));
    }
  } else if (collection == "jobs") {
    if (parts.size() == 2 && get) {
      Json out = Json::array();
      for (const auto& s : jobs_.list()) out.push_back(job_json(s));
      return {200, out};
    }
    if (parts.size() == 2 && post) return enqueue_job(parse_body(body));
    if (parts.size() == 3 && get) {
      auto status = jobs_.status(parts[2]);
      if (!status) return failure(Error(Errc::kNotFound, "unknown job '" + parts[2] + "'", parts[2]));
      return {200, job_json(*status)};
    }
  }
  return not_found("no route for " + method + " " + path);
}

ApiResponse Api::submit_model(const Json& body) {
  const ModelEntry model = body.get<ModelEntry>();
  check_id(model.model_id, "model_id");
  try {
    store_.load_task(model.task_id);
  } catch (const Error& e) {
    if (e.code() != Errc::kNotFound) throw;
    throw Error(Errc::kValidationError, "unknown task '" + model.task_id + "'", "task_id");
  }
  check_executable(model);
  store_.save_model(model);
  return {201, model};
}

ApiResponse Api::enqueue_job(const Json& body) {
  if (!body.is_object()) {
    throw Error(Errc::kValidationError, "request body must be a JSON object", "body");
  }
  if (!body.contains("model_id") || !body["model_id"].is_string()) {
    throw Error(Errc::kValidationError, "model_id is required", "model_id");
  }
  const ModelEntry model = store_.load_model(body["model_id"].get<std::string>());
  std::string task_id = model.task_id;
  if (body.contains("task_id")) {
    if (!body["task_id"].is_string()) {
      throw Error(Errc::kValidationError, "task_id must be a string", "task_id");
    }
    task_id = body["task_id"].get<std::string>();
  }
  store_.load_task(task_id);
  const std::string id = jobs_.enqueue(model.model_id, task_id);
  return {202, job_json(*jobs_.status(id))};
}

ApiResponse Api::predict(const std::string& model_id, const Json& body) {
  const ModelEntry model = store_.load_model(model_id);
  if (!body.is_object() || !body.contains("input") || !body["input"].is_object()) {
    throw Error(Errc::kValidationError, "input must be an object of text fields", "input");
  }
  std::map<std::string, std::string> input;
  for (const auto& [key, value] : body["input"].items()) {
    if (!value.is_string()) {
      throw Error(Errc::kValidationError, "input field '" + key + "' must be a string",
                  "input." + key);
    }
    input.emplace(key, value.get<std::string>());
  }
  RunLimits limits;
  try {
    limits = store_.load_task(model.task_id).limits;
  } catch (const Error& e) {
    if (e.code() != Errc::kNotFound) throw;
  }
  const auto result = pool_.predict(model, input, limits);
  return {200, Json{{"prediction", result.prediction}, {"latency_ms", result.latency_ms}}};
}

HttpServer::HttpServer(Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse out = api_.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  server_->Get(".*", forward);
  server_->Post(".*", forward);
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(Errc::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace dynaboard
