#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "qx/channel.hpp"
#include "qx/eval.hpp"
#include "qx/net.hpp"

namespace qx {

using namespace std::chrono_literals;

class NoHealthyWorkers : public std::runtime_error {
 public:
  NoHealthyWorkers() : std::runtime_error("no healthy workers") {}
};

/// Scheduling state of a worker pool. Not synchronized; the owner
/// serializes access.
class PoolState {
 public:
  explicit PoolState(std::vector<net::Endpoint> workers);

  std::size_t size() const { return workers_.size(); }
  const net::Endpoint& endpoint(std::size_t i) const { return workers_.at(i).endpoint; }
  bool healthy(std::size_t i) const { return workers_.at(i).healthy; }
  void set_healthy(std::size_t i, bool healthy) { workers_.at(i).healthy = healthy; }
  std::size_t healthy_count() const;
  std::size_t in_flight(std::size_t i) const { return workers_.at(i).in_flight; }
  void begin_request(std::size_t i) { ++workers_.at(i).in_flight; }
  void end_request(std::size_t i) { --workers_.at(i).in_flight; }
  std::size_t cursor() const { return cursor_; }

  /// Round-robin over healthy workers: the first healthy worker strictly
  /// after the cursor (wrapping), which becomes the new cursor.
  std::size_t schedule();

 private:
  struct Worker {
    net::Endpoint endpoint;
    bool healthy = true;
    std::size_t in_flight = 0;
  };
  std::vector<Worker> workers_;
  std::size_t cursor_ = 0;
};

// --- worker --------------------------------------------------------------

struct WorkerConfig {
  net::Endpoint listen{"127.0.0.1", 0};
  std::uint64_t fuel = kDefaultFuel;
  std::size_t concurrency = 4;
  std::size_t max_queue = 128;
  net::Millis handshake_timeout = 5s;
};

class MessageServer;

/// Evaluates Eval requests from any number of connections on a fixed pool
/// of executor threads fed by a bounded queue.
class WorkerServer {
 public:
  struct Stats {
    std::size_t running = 0;
    std::size_t queued = 0;
    std::uint64_t completed = 0;
    std::uint64_t rejected = 0;
  };

  explicit WorkerServer(WorkerConfig cfg);
  ~WorkerServer();
  WorkerServer(const WorkerServer&) = delete;
  WorkerServer& operator=(const WorkerServer&) = delete;

  /// Binds and starts serving; returns the bound address (useful with port 0).
  net::Endpoint start();
  void stop();
  Stats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- dispatcher ----------------------------------------------------------

struct DispatcherOptions {
  std::size_t retry_limit = 2;
  net::Millis request_timeout = 30s;
  net::Millis handshake_timeout = 5s;
  net::Millis probe_interval = 2s;
};

/// What the pool made of one request: a literal, a deterministic evaluation
/// error, or no answer.
using DispatchResult = std::variant<Expr, EvalError, TransportError>;

/// Owns connections to a worker pool and routes requests to it. Failed
/// transports mark the worker unhealthy and the request moves on to the
/// next scheduled worker; a background prober brings workers back.
class Dispatcher {
 public:
  using Callback = std::function<void(DispatchResult)>;

  explicit Dispatcher(std::vector<net::Endpoint> workers, DispatcherOptions opts = {});
  ~Dispatcher();
  Dispatcher(const Dispatcher&) = delete;
  Dispatcher& operator=(const Dispatcher&) = delete;

  /// `done` runs exactly once, possibly inline.
  void submit(const Expr& e, std::optional<std::uint64_t> fuel, Callback done);

  std::size_t size() const;
  std::size_t healthy_count() const;
  /// Requests sent to each worker so far, retries included.
  std::vector<std::uint64_t> sent_counts() const;
  /// Runs one health-probe round synchronously.
  void probe_now();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// A Dispatcher reachable over the wire protocol.
class DispatcherServer {
 public:
  DispatcherServer(net::Endpoint listen, std::vector<net::Endpoint> workers, DispatcherOptions opts = {});
  ~DispatcherServer();
  DispatcherServer(const DispatcherServer&) = delete;
  DispatcherServer& operator=(const DispatcherServer&) = delete;

  net::Endpoint start();
  void stop();
  Dispatcher& dispatcher();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- client --------------------------------------------------------------

using Outcome = std::variant<Value, EvalError, TransportError>;

/// Canonical value text, or `(error CODE "detail")`.
std::string describe(const Outcome& o);

struct ExecutorOptions {
  std::size_t retry_limit = 2;
  net::Millis request_timeout = 30s;
  net::Millis handshake_timeout = 5s;
  /// Fuel override sent with every request; the worker default otherwise.
  std::optional<std::uint64_t> fuel;
  /// Requests in flight per healthy worker during batches (embedded mode).
  std::size_t per_worker_window = 4;
  /// Batch window when talking to a remote dispatcher, whose pool size is
  /// not visible to the client.
  std::size_t remote_window = 16;
  /// Threads for local evaluation; 0 means hardware concurrency.
  std::size_t local_threads = 0;
};

/// Client handle for evaluating quotations: through a dispatcher process,
/// through an in-process dispatcher over a worker list, or locally.
/// Safe for concurrent use.
class RExecutor {
 public:
  using Callback = std::function<void(Outcome)>;

  static RExecutor remote(const net::Endpoint& dispatcher, ExecutorOptions opts = {});
  static RExecutor embedded(std::vector<net::Endpoint> workers, ExecutorOptions opts = {});
  static RExecutor local(ExecutorOptions opts = {});

  RExecutor(RExecutor&&) noexcept;
  RExecutor& operator=(RExecutor&&) noexcept;
  ~RExecutor();

  Outcome eval(const Expr& e);
  /// Result i belongs to es[i]; per-item failures do not stop the batch.
  std::vector<Outcome> eval_batch(const std::vector<Expr>& es);
  /// Asynchronous evaluation; `done` runs exactly once, possibly inline.
  void submit(const Expr& e, Callback done);
  /// As above with a per-request fuel budget instead of the configured one.
  void submit(const Expr& e, std::optional<std::uint64_t> fuel, Callback done);

  /// Requests kept in flight by eval_batch.
  std::size_t window() const;
  /// Healthy workers known to this client; remote mode reports 1 while the
  /// dispatcher is reachable.
  std::size_t healthy_workers() const;
  /// The in-process dispatcher in embedded mode, else nullptr.
  Dispatcher* dispatcher();

  struct Backend;

 private:
  explicit RExecutor(std::unique_ptr<Backend> b);
  std::unique_ptr<Backend> impl_;
};

}  // namespace qx
