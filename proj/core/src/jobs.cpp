#include "dynaboard/jobs.hpp"

#include <cstdio>
#include <exception>

namespace dynaboard {

std::string_view to_string(JobState state) noexcept {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kFailed:
      return "failed";
  }
  return "unknown";
}

JobQueue::JobQueue(Work work) : work_(std::move(work)) {
  thread_ = std::thread([this] { worker(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::string JobQueue::enqueue(const std::string& model_id, const std::string& task_id) {
  std::string id;
  {
    std::lock_guard lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06zu", ++next_id_);
    id = buf;
    JobStatus status;
    status.job_id = id;
    status.model_id = model_id;
    status.task_id = task_id;
    status.created_at = now_utc();
    jobs_.emplace(id, std::move(status));
    pending_.push_back(id);
  }
  cv_.notify_all();
  return id;
}

std::optional<JobStatus> JobQueue::status(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<JobStatus> JobQueue::list() const {
  std::lock_guard lock(mu_);
  std::vector<JobStatus> out;
  for (const auto& [id, s] : jobs_) out.push_back(s);
  return out;
}

void JobQueue::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return pending_.empty() && !running_; });
}

void JobQueue::worker() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
    if (stopping_) return;
    const std::string id = pending_.front();
    pending_.pop_front();
    JobStatus& job = jobs_.at(id);
    job.state = JobState::kRunning;
    job.started_at = now_utc();
    running_ = true;
    const std::string model_id = job.model_id;
    const std::string task_id = job.task_id;

    lock.unlock();
    std::size_t records = 0;
    std::string failure;
    bool failed = false;
    try {
      records = work_(model_id, task_id);
    } catch (const std::exception& e) {
      failed = true;
      failure = e.what();
    } catch (...) {
      failed = true;
      failure = "unknown failure";
    }
    lock.lock();

    JobStatus& done = jobs_.at(id);
    done.state = failed ? JobState::kFailed : JobState::kDone;
    done.reason = failure;
    done.records = records;
    done.finished_at = now_utc();
    running_ = false;
    if (pending_.empty()) idle_cv_.notify_all();
  }
}

}  // namespace dynaboard
