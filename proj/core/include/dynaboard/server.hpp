#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "dynaboard/error.hpp"
#include "dynaboard/jobs.hpp"
#include "dynaboard/lexicon.hpp"
#include "dynaboard/runner.hpp"
#include "dynaboard/serialize.hpp"
#include "dynaboard/store.hpp"

namespace httplib {
class Server;
}

namespace dynaboard {

// The one scoring path behind both the HTTP API and the CLI: latest records
// (optionally as of a time) ranked under the requested weights.
Leaderboard score_task(const Store& store, const TaskConfig& task, const ScoreRequest& request,
                       Timestamp at = now_utc());

// Loads the task's datasets, evaluates the model, and appends every record
// in one commit. Nothing is written when the evaluation fails.
TaskEvaluation evaluate_and_commit(Store& store, const ModelEntry& model, const TaskConfig& task,
                                   std::uint64_t seed,
                                   const FairnessLexicon& lexicon = FairnessLexicon::bundled());

// HTTP status for a domain error.
int http_status(Errc code) noexcept;

struct ApiResponse {
  int status = 200;
  Json body;
};

// Routes of the REST API, independent of the HTTP transport:
//   GET  /api/tasks                    GET  /api/tasks/{id}
//   GET  /api/tasks/{id}/leaderboard   POST /api/tasks/{id}/score
//   GET  /api/models                   GET  /api/models/{id}
//   POST /api/models                   POST /api/models/{id}/predict
//   POST /api/jobs                     GET  /api/jobs/{id}
// Errors are {code, message, field?}.
class Api {
 public:
  explicit Api(Store store, std::uint64_t seed = 0);

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::string& body);

  JobQueue& jobs() noexcept { return jobs_; }
  PredictPool& predictions() noexcept { return pool_; }
  const Store& store() const noexcept { return store_; }

 private:
  ApiResponse route(const std::string& method, const std::string& path, const std::string& body);
  ApiResponse submit_model(const Json& body);
  ApiResponse enqueue_job(const Json& body);
  ApiResponse predict(const std::string& model_id, const Json& body);

  Store store_;
  std::uint64_t seed_;
  PredictPool pool_;
  JobQueue jobs_;  // last: its worker uses the members above
};

// cpp-httplib transport for an Api, with permissive CORS for browser clients.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds any free port. Returns the bound port. Throws kIoError.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  Api& api_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace dynaboard
