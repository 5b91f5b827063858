#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dynaboard/timestamp.hpp"

namespace dynaboard {

enum class JobState { kQueued, kRunning, kDone, kFailed };
std::string_view to_string(JobState state) noexcept;

struct JobStatus {
  std::string job_id;
  std::string model_id;
  std::string task_id;
  JobState state = JobState::kQueued;
  std::string reason;         // set when failed
  std::size_t records = 0;    // committed when done
  Timestamp created_at{};
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
};

// Evaluation jobs executed one at a time, in submission order, on a single
// worker thread.
class JobQueue {
 public:
  // Evaluates and commits; returns the number of records committed.
  // Throwing marks the job failed with the exception text as the reason.
  using Work = std::function<std::size_t(const std::string& model_id, const std::string& task_id)>;

  explicit JobQueue(Work work);
  // Finishes the running job; queued jobs are abandoned.
  ~JobQueue();

  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string enqueue(const std::string& model_id, const std::string& task_id);
  std::optional<JobStatus> status(const std::string& job_id) const;
  std::vector<JobStatus> list() const;
  // Blocks until nothing is queued or running.
  void wait_idle();

 private:
  void worker();

  Work work_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> pending_;
  std::map<std::string, JobStatus> jobs_;
  std::size_t next_id_ = 0;
  bool running_ = false;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace dynaboard
