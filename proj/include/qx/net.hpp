#pragma once

// Thin blocking TCP wrappers over POSIX sockets.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qx::net {

using Millis = std::chrono::milliseconds;

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string to_string() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Comma-separated endpoint list; empty items are ignored.
std::vector<Endpoint> parse_endpoints(std::string_view csv);

class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  TcpStream(TcpStream&& other) noexcept : fd_(other.release()) {}
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream() { close(); }

  static TcpStream connect(const Endpoint& to, Millis timeout);

  bool is_open() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  /// Writes every byte or throws NetError. Never raises SIGPIPE.
  void send_all(std::string_view bytes);
  /// Up to `n` bytes; 0 means the peer closed. Throws NetError.
  std::size_t recv_some(char* buf, std::size_t n);
  /// Waits until data (or EOF) is readable. False on timeout.
  bool wait_readable(Millis timeout);
  /// Wakes any thread blocked on this socket; the descriptor stays valid.
  void shutdown();
  void close();

 private:
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  int fd_ = -1;
};

class TcpListener {
 public:
  TcpListener() = default;
  TcpListener(TcpListener&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener() { close(); }

  /// Port 0 picks an ephemeral port.
  static TcpListener bind(const Endpoint& at);
  Endpoint local_endpoint() const;
  /// nullopt on timeout.
  std::optional<TcpStream> accept(Millis timeout);
  void close();

 private:
  int fd_ = -1;
  std::string host_;
};

}  // namespace qx::net
