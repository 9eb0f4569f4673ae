#pragma once

#include <csignal>
#include <signal.h>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

namespace qx::tools {

enum Exit : int { ok = 0, eval_error = 1, transport = 2, usage = 3 };

/// Blocks SIGINT, SIGTERM and SIGHUP in this and every later thread. Call
/// before starting servers, then wait_for_shutdown().
inline sigset_t block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
  return set;
}

inline int wait_for_shutdown(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

inline std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

/// The address line parents wait for.
inline void announce(const std::string& address) {
  std::printf("listening %s\n", address.c_str());
  std::fflush(stdout);
}

}  // namespace qx::tools
