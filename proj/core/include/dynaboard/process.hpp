#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace dynaboard {

// A child program with its standard input and output connected to pipes.
// Standard error is inherited. The destructor kills and reaps the child.
class ChildProcess {
 public:
  // Paths containing '/' are executed as given; bare names are looked up on
  // PATH. Throws kSpawnFailed.
  ChildProcess(const std::string& program, const std::vector<std::string>& args);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  pid_t pid() const noexcept { return pid_; }

  // Writes `line` plus '\n'. Throws kModelCrashed if the child closed its
  // input or exited.
  void write_line(const std::string& line);

  // Next output line without the trailing newline; nullopt on timeout.
  // Throws kModelCrashed at end of output.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  // Closes the child's input and waits up to `grace` for it to exit, then
  // kills it. Returns the wait status.
  int close_and_wait(std::chrono::milliseconds grace);

  void kill() noexcept;

  // Wait status if the child has exited (non-blocking).
  std::optional<int> poll_exit();

 private:
  [[noreturn]] void crashed(const std::string& what);

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
  std::optional<int> exit_status_;
};

// "exit status 3", "killed by signal 9".
std::string describe_wait_status(int status);

}  // namespace dynaboard
