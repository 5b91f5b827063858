#pragma once

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace dynaboard {

inline constexpr double kBytesPerGiB = 1024.0 * 1024.0 * 1024.0;

struct MemorySummary {
  double avg_gib = 0.0;
  double peak_gib = 0.0;
  std::size_t sample_count = 0;
};

// Mean and max of resident-set samples. Throws kProcessGone when empty.
MemorySummary summarize_samples(std::span<const double> samples_gib);

// Resident set size of `pid` from /proc, or nullopt once the process is gone.
std::optional<double> resident_gib(pid_t pid);

// Samples `pid` every `interval` until `duration` elapses or the process
// exits. Throws kProcessGone when no sample was obtained.
MemorySummary sample_memory(pid_t pid, std::chrono::milliseconds interval,
                            std::chrono::milliseconds duration);

// Background sampler for a measured window. The first sample is taken on
// start, then one per interval. When a sample exceeds `cap_gib` the process
// is killed and cap_exceeded() turns true.
class MemorySampler {
 public:
  MemorySampler(pid_t pid, std::chrono::milliseconds interval, double cap_gib);
  ~MemorySampler();

  MemorySampler(const MemorySampler&) = delete;
  MemorySampler& operator=(const MemorySampler&) = delete;

  // Stops sampling and returns every sample taken, in GiB.
  std::vector<double> stop();
  bool cap_exceeded() const noexcept { return cap_exceeded_.load(); }

 private:
  void loop();

  pid_t pid_;
  std::chrono::milliseconds interval_;
  double cap_gib_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::vector<double> samples_;
  std::atomic<bool> cap_exceeded_{false};
  std::thread thread_;
};

}  // namespace dynaboard
