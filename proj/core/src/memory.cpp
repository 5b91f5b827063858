#include "dynaboard/memory.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>

#include "dynaboard/error.hpp"

namespace dynaboard {

MemorySummary summarize_samples(std::span<const double> samples_gib) {
  if (samples_gib.empty()) throw Error(Errc::kProcessGone, "no memory sample was obtained");
  MemorySummary out;
  out.sample_count = samples_gib.size();
  out.avg_gib = std::accumulate(samples_gib.begin(), samples_gib.end(), 0.0) /
                static_cast<double>(samples_gib.size());
  out.peak_gib = *std::max_element(samples_gib.begin(), samples_gib.end());
  return out;
}

std::optional<double> resident_gib(pid_t pid) {
  std::ifstream statm("/proc/" + std::to_string(pid) + "/statm");
  unsigned long long size_pages = 0;
  unsigned long long resident_pages = 0;
  if (!(statm >> size_pages >> resident_pages)) return std::nullopt;
  // Zombies report an empty address space.
  if (resident_pages == 0) return std::nullopt;
  static const long page = ::sysconf(_SC_PAGESIZE);
  return static_cast<double>(resident_pages) * static_cast<double>(page) / kBytesPerGiB;
}

MemorySummary sample_memory(pid_t pid, std::chrono::milliseconds interval,
                            std::chrono::milliseconds duration) {
  std::vector<double> samples;
  const auto start = std::chrono::steady_clock::now();
  auto next = start;
  while (std::chrono::steady_clock::now() - start <= duration) {
    const auto rss = resident_gib(pid);
    if (!rss) break;
    samples.push_back(*rss);
    next += interval;
    std::this_thread::sleep_until(next);
  }
  return summarize_samples(samples);
}

MemorySampler::MemorySampler(pid_t pid, std::chrono::milliseconds interval, double cap_gib)
    : pid_(pid), interval_(interval), cap_gib_(cap_gib) {
  thread_ = std::thread([this] { loop(); });
}

MemorySampler::~MemorySampler() { stop(); }

std::vector<double> MemorySampler::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::lock_guard lock(mu_);
  return samples_;
}

void MemorySampler::loop() {
  auto next = std::chrono::steady_clock::now();
  std::unique_lock lock(mu_);
  while (!stopping_) {
    lock.unlock();
    const auto rss = resident_gib(pid_);
    lock.lock();
    if (rss) {
      samples_.push_back(*rss);
      if (*rss > cap_gib_ && !cap_exceeded_.load()) {
        cap_exceeded_ = true;
        ::kill(pid_, SIGKILL);
      }
    }
    next += interval_;
    cv_.wait_until(lock, next, [this] { return stopping_; });
  }
}

}  // namespace dynaboard
