#include "dynaboard/runner.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include <nlohmann/json.hpp>

#include "dynaboard/error.hpp"
#include "dynaboard/memory.hpp"

namespace dynaboard {

namespace {

using Clock = std::chrono::steady_clock;

std::mutex& local_run_mutex() {
  static std::mutex mu;
  return mu;
}

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

[[noreturn]] void violation(std::size_t line, const std::string& reason) {
  throw Error(Errc::kProtocolViolation,
              "line " + std::to_string(line) + ": " + reason, "line " + std::to_string(line));
}

}  // namespace

std::filesystem::path RunLock::lock_path() {
  if (const char* env = std::getenv("DYNA_RUNNER_LOCK"); env && *env) return env;
  return std::filesystem::temp_directory_path() / "dynaboard-runner.lock";
}

RunLock::RunLock() : local_(local_run_mutex()) {
  const auto path = lock_path();
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0666);
  if (fd_ < 0) {
    throw Error(Errc::kIoError, "cannot open runner lock '" + path.string() + "': " +
                                    std::strerror(errno), path.string());
  }
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno == EINTR) continue;
    const int err = errno;
    ::close(fd_);
    throw Error(Errc::kIoError, std::string("cannot lock runner: ") + std::strerror(err));
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

ModelSession::ModelSession(const ModelEntry& model, const RunLimits& limits)
    : model_(model), process_(std::make_unique<ChildProcess>(model.exec_ref, model.args)) {
  auto line = process_->read_line(to_ms(limits.handshake_timeout_seconds));
  if (!line) {
    throw Error(Errc::kTimeout, "model '" + model.model_id + "' sent no handshake within " +
                                    std::to_string(limits.handshake_timeout_seconds) + " s",
                model.model_id);
  }
  ++lines_read_;
  const auto msg = nlohmann::json::parse(*line, nullptr, /*allow_exceptions=*/false);
  if (!msg.is_object() || msg.size() != 1 || !msg.contains("status") || msg["status"] != "ready") {
    violation(lines_read_, "expected handshake {\"status\":\"ready\"}");
  }
}

Prediction ModelSession::request(const std::string& uid,
                                 const std::map<std::string, std::string>& input,
                                 std::chrono::milliseconds timeout) {
  nlohmann::json req(input);
  req["uid"] = uid;
  process_->write_line(req.dump());
  auto line = process_->read_line(timeout);
  if (!line) {
    process_->kill();
    throw Error(Errc::kTimeout,
                "no response for '" + uid + "' within " + std::to_string(timeout.count()) + " ms",
                uid);
  }
  ++lines_read_;
  const auto msg = nlohmann::json::parse(*line, nullptr, /*allow_exceptions=*/false);
  if (!msg.is_object()) violation(lines_read_, "response is not a JSON object");
  if (!msg.contains("uid") || !msg["uid"].is_string()) violation(lines_read_, "response has no uid");
  if (msg["uid"] != uid) {
    violation(lines_read_, "response uid '" + msg["uid"].get<std::string>() +
                               "' does not echo request uid '" + uid + "'");
  }
  const bool has_label = msg.contains("label");
  const bool has_answer = msg.contains("answer_text");
  if (has_label == has_answer) {
    violation(lines_read_, "response must carry exactly one of label, answer_text");
  }
  const auto& payload = has_label ? msg["label"] : msg["answer_text"];
  if (!payload.is_string()) violation(lines_read_, "prediction must be a string");
  return Prediction{uid, has_label ? PayloadKind::kLabel : PayloadKind::kAnswerText,
                    payload.get<std::string>()};
}

int ModelSession::close() { return process_->close_and_wait(std::chrono::seconds(5)); }

RunReport measure_run(ModelSession& session, const std::string& dataset_id,
                      std::span<const GoldExample> dataset, const RunLimits& limits) {
  if (dataset.empty()) throw Error(Errc::kEmptyDataset, "dataset is empty", dataset_id);
  RunReport report;
  report.model_id = session.model().model_id;
  report.dataset_id = dataset_id;
  report.predictions.reserve(dataset.size());

  const auto timeout = to_ms(limits.example_timeout_seconds);
  const auto start = Clock::now();
  MemorySampler sampler(session.process().pid(), to_ms(limits.sample_interval_seconds),
                        limits.memory_cap_gib);
  Clock::time_point end;
  try {
    for (const auto& example : dataset) {
      report.predictions.push_back(session.request(example.uid, example.input, timeout));
    }
    end = Clock::now();
  } catch (const Error& e) {
    sampler.stop();
    if (sampler.cap_exceeded()) {
      throw Error(Errc::kMemoryLimitExceeded,
                  "model exceeded the memory cap of " + std::to_string(limits.memory_cap_gib) +
                      " GiB",
                  session.model().model_id);
    }
    throw;
  }
  const auto samples = sampler.stop();
  if (sampler.cap_exceeded()) {
    throw Error(Errc::kMemoryLimitExceeded,
                "model exceeded the memory cap of " + std::to_string(limits.memory_cap_gib) +
                    " GiB",
                session.model().model_id);
  }
  const auto memory = summarize_samples(samples);
  report.wall_seconds = std::chrono::duration<double>(end - start).count();
  report.examples_per_second =
      report.wall_seconds > 0.0 ? static_cast<double>(dataset.size()) / report.wall_seconds : 0.0;
  report.memory_avg_gib = memory.avg_gib;
  report.memory_peak_gib = memory.peak_gib;
  report.sample_count = memory.sample_count;
  return report;
}

RunReport run_evaluation(const ModelEntry& model, const std::string& dataset_id,
                         std::span<const GoldExample> dataset, const RunLimits& limits) {
  if (dataset.empty()) throw Error(Errc::kEmptyDataset, "dataset is empty", dataset_id);
  RunLock lock;
  ModelSession session(model, limits);
  RunReport report = measure_run(session, dataset_id, dataset, limits);
  report.exit_status = session.close();
  return report;
}

InteractiveResult PredictPool::predict(const ModelEntry& model,
                                       const std::map<std::string, std::string>& input,
                                       const RunLimits& limits) {
  const auto start = Clock::now();
  RunLock lock;
  std::shared_ptr<ModelSession> session;
  std::string uid;
  {
    std::lock_guard guard(mu_);
    uid = "interactive-" + std::to_string(++next_uid_);
    if (auto it = sessions_.find(model.model_id); it != sessions_.end()) {
      if (it->second->process().poll_exit()) {
        sessions_.erase(it);
      } else {
        session = it->second;
      }
    }
  }
  if (!session) {
    session = std::make_shared<ModelSession>(model, limits);
    std::lock_guard guard(mu_);
    sessions_[model.model_id] = session;
  }
  try {
    Prediction p = session->request(uid, input, to_ms(limits.example_timeout_seconds));
    const double latency =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return {std::move(p), latency};
  } catch (const Error&) {
    std::lock_guard guard(mu_);
    sessions_.erase(model.model_id);
    throw;
  }
}

std::size_t PredictPool::warm_count() const {
  std::lock_guard guard(mu_);
  return sessions_.size();
}

}  // namespace dynaboard
