#pragma once

// Child processes for the benchmark driver and the acceptance run.

#include <chrono>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

#include "qx/net.hpp"

namespace qx::proc {

/// A spawned executable with its stdout on a pipe. Killed (SIGKILL) and
/// reaped on destruction if still running.
class Child {
 public:
  /// `quiet` sends the child's stderr to /dev/null.
  static Child spawn(const std::string& path, const std::vector<std::string>& args, bool quiet = false);

  Child(Child&& other) noexcept;
  Child& operator=(Child&& other) noexcept;
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;
  ~Child();

  pid_t pid() const { return pid_; }
  /// Next stdout line without the newline; nullopt on EOF or timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// Everything left on stdout until EOF.
  std::string read_rest();
  void signal(int sig);
  /// Waits for exit; the exit status, or 128 + signal number.
  int wait();
  bool running() const { return pid_ > 0 && !reaped_; }

 private:
  Child() = default;
  void reset();

  pid_t pid_ = -1;
  int out_ = -1;
  bool reaped_ = false;
  int status_ = 0;
  std::string buffer_;
};

/// Spawns a server binary that prints `listening HOST:PORT` first, and
/// returns it with the announced address. Throws std::runtime_error if the
/// line does not arrive in time.
std::pair<Child, net::Endpoint> spawn_server(const std::string& path, const std::vector<std::string>& args,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Directory holding the running executable.
std::string self_dir();

}  // namespace qx::proc
