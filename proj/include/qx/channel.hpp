#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "qx/expr.hpp"
#include "qx/net.hpp"
#include "qx/wire.hpp"

namespace qx {

/// The request never produced an answer: connection refused or lost,
/// timeout, no worker available, or retries used up. Safe to resubmit.
struct TransportError {
  enum class Kind { unreachable, timeout, no_workers, exhausted, protocol };
  Kind kind = Kind::unreachable;
  std::string detail;
  friend bool operator==(const TransportError& a, const TransportError& b) { return a.kind == b.kind; }
};

std::string_view to_string(TransportError::Kind kind);

/// What a peer answered to one Eval: Result or Error, or no answer at all.
using Reply = std::variant<wire::Result, wire::Error, TransportError>;

/// Client side of one protocol connection. Multiplexes concurrent requests
/// over the socket by request id; a background thread reads replies and
/// fires callbacks. Once broken, every pending and future call fails with a
/// TransportError.
class Channel : public std::enable_shared_from_this<Channel> {
 public:
  using Callback = std::function<void(Reply)>;
  using Clock = std::chrono::steady_clock;

  /// Connects and performs the Hello handshake. Throws net::NetError, or
  /// std::runtime_error on a refused handshake.
  static std::shared_ptr<Channel> open(const net::Endpoint& peer, net::Millis handshake_timeout);

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;
  ~Channel();

  /// Sends Eval and arranges for `done` to run exactly once, on the reader
  /// thread or inline if the channel is already broken.
  void call(const Expr& expr, std::optional<std::uint64_t> fuel, net::Millis timeout, Callback done);
  /// Sends Ping; `done(true)` on Pong, `done(false)` on failure or timeout.
  void ping(net::Millis timeout, std::function<void(bool)> done);

  bool broken() const;
  const net::Endpoint& peer() const { return peer_; }
  /// Fails everything pending and wakes the reader without waiting for it.
  /// Safe from any thread, including inside callbacks. Idempotent.
  void abort();
  /// abort(), then waits for the reader thread unless called from it.
  void close();

 private:
  struct Pending {
    Callback done;
    Clock::time_point deadline;
  };
  struct PendingPing {
    std::function<void(bool)> done;
    Clock::time_point deadline;
  };

  Channel(net::Endpoint peer, net::TcpStream stream);
  void start_reader();
  void read_loop();
  bool dispatch(const wire::Message& m);
  void expire(Clock::time_point now);
  void fail_all(const std::string& why);
  bool send(const std::string& frame);

  net::Endpoint peer_;
  net::TcpStream stream_;
  wire::FrameDecoder decoder_;
  mutable std::mutex mu_;
  std::mutex write_mu_;
  std::mutex join_mu_;
  std::map<std::uint64_t, Pending> pending_;
  std::deque<PendingPing> pings_;
  std::uint64_t next_id_ = 1;
  bool broken_ = false;
  std::string broken_reason_;
  std::thread reader_;
};

}  // namespace qx
