#pragma once

// Shared accept loop, handshake and framing for the worker and dispatcher
// servers.

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "qx/net.hpp"
#include "qx/wire.hpp"

namespace qx {

/// Server side of one client connection. Writes are serialized; a failed
/// write marks the connection dead and further sends are dropped.
class Connection {
 public:
  explicit Connection(net::TcpStream s) : stream_(std::move(s)) {}

  bool send(const wire::Message& m);
  void shutdown() { stream_.shutdown(); }
  bool alive() const { return !dead_; }
  net::TcpStream& stream() { return stream_; }

 private:
  net::TcpStream stream_;
  std::mutex write_mu_;
  std::atomic<bool> dead_{false};
};

class MessageServer {
 public:
  explicit MessageServer(net::Millis handshake_timeout) : handshake_timeout_(handshake_timeout) {}
  virtual ~MessageServer() = default;

  net::Endpoint start(const net::Endpoint& at);
  /// Closes the listener and every connection and joins all threads.
  void stop();

 protected:
  /// Called on the connection's reader thread for every Eval after the
  /// handshake. Must not block for long.
  virtual void on_eval(const std::shared_ptr<Connection>& conn, wire::Eval eval) = 0;

 private:
  struct Handler {
    std::thread thread;
    std::shared_ptr<Connection> conn;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void serve(const std::shared_ptr<Connection>& conn);
  bool handshake(Connection& conn, wire::FrameDecoder& decoder);
  void reap(bool all);

  net::Millis handshake_timeout_;
  net::TcpListener listener_;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::list<Handler> handlers_;
};

}  // namespace qx
