#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynaboard/metrics.hpp"
#include "dynaboard/process.hpp"
#include "dynaboard/types.hpp"

namespace dynaboard {

struct RunReport {
  std::string model_id;
  std::string dataset_id;
  std::vector<Prediction> predictions;  // dataset order
  double wall_seconds = 0.0;            // first request sent to last response read
  double examples_per_second = 0.0;
  double memory_avg_gib = 0.0;
  double memory_peak_gib = 0.0;
  std::size_t sample_count = 0;
  std::optional<int> exit_status;  // set once the model process has exited
};

// Host-wide lock serializing measured runs and interactive predictions:
// a process-local mutex plus an flock on a shared lock file, so separate
// processes on the same host also take turns.
class RunLock {
 public:
  RunLock();
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

  // $DYNA_RUNNER_LOCK, or dynaboard-runner.lock in the temp directory.
  static std::filesystem::path lock_path();

 private:
  std::unique_lock<std::mutex> local_;
  int fd_ = -1;
};

// A started model that has completed the handshake. Requests go out one at
// a time; the next is sent only after the previous response arrived.
class ModelSession {
 public:
  // Throws kSpawnFailed, kModelCrashed, kTimeout (no handshake in time), or
  // kProtocolViolation (first line is not the handshake).
  ModelSession(const ModelEntry& model, const RunLimits& limits);

  const ModelEntry& model() const noexcept { return model_; }
  ChildProcess& process() noexcept { return *process_; }

  // One round trip. Throws kTimeout, kModelCrashed, kProtocolViolation with
  // the offending output line number.
  Prediction request(const std::string& uid, const std::map<std::string, std::string>& input,
                     std::chrono::milliseconds timeout);

  // Closes the model's input and returns its wait status.
  int close();

 private:
  ModelEntry model_;
  std::unique_ptr<ChildProcess> process_;
  std::size_t lines_read_ = 0;
};

// Measured pass over `dataset` on an already started session. The caller
// holds the RunLock. Throws what ModelSession::request throws, plus
// kMemoryLimitExceeded, kProcessGone, kEmptyDataset.
RunReport measure_run(ModelSession& session, const std::string& dataset_id,
                      std::span<const GoldExample> dataset, const RunLimits& limits);

// Starts the model, measures one dataset, and shuts it down, all under the
// RunLock.
RunReport run_evaluation(const ModelEntry& model, const std::string& dataset_id,
                         std::span<const GoldExample> dataset, const RunLimits& limits);

struct InteractiveResult {
  Prediction prediction;
  double latency_ms = 0.0;  // includes any wait for a measured run to finish
};

// Warm model processes for interactive predictions, started on first use.
// A process that times out or crashes is discarded and restarted on the
// next request.
class PredictPool {
 public:
  InteractiveResult predict(const ModelEntry& model,
                            const std::map<std::string, std::string>& input,
                            const RunLimits& limits);
  std::size_t warm_count() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<ModelSession>> sessions_;
  std::size_t next_uid_ = 0;
};

}  // namespace dynaboard
