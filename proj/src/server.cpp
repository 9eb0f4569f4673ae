#include "server.hpp"

namespace qx {

namespace {

constexpr net::Millis kPollSlice{200};

}  // namespace

bool Connection::send(const wire::Message& m) {
  std::string frame = wire::encode_message(m);
  std::lock_guard lk(write_mu_);
  if (dead_) return false;
  try {
    stream_.send_all(frame);
    return true;
  } catch (const net::NetError&) {
    dead_ = true;
    return false;
  }
}

net::Endpoint MessageServer::start(const net::Endpoint& at) {
  listener_ = net::TcpListener::bind(at);
  net::Endpoint bound = listener_.local_endpoint();
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
  return bound;
}

void MessageServer::stop() {
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  {
    std::lock_guard lk(mu_);
    for (auto& h : handlers_) h.conn->shutdown();
  }
  reap(true);
}

void MessageServer::reap(bool all) {
  std::list<Handler> finished;
  {
    std::lock_guard lk(mu_);
    for (auto it = handlers_.begin(); it != handlers_.end();) {
      auto next = std::next(it);
      if (all || *it->done) finished.splice(finished.end(), handlers_, it);
      it = next;
    }
  }
  for (auto& h : finished) h.thread.join();
}

void MessageServer::accept_loop() {
  while (!stopping_) {
    std::optional<net::TcpStream> s;
    try {
      s = listener_.accept(kPollSlice);
    } catch (const net::NetError&) {
      continue;
    }
    reap(false);
    if (!s) continue;
    auto conn = std::make_shared<Connection>(std::move(*s));
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lk(mu_);
    handlers_.push_back(Handler{std::thread([this, conn, done] {
                                  serve(conn);
                                  *done = true;
                                }),
                                conn, done});
  }
}

bool MessageServer::handshake(Connection& conn, wire::FrameDecoder& decoder) {
  auto deadline = std::chrono::steady_clock::now() + handshake_timeout_;
  char buf[4096];
  for (;;) {
    if (auto payload = decoder.next_payload()) {
      wire::Message m = wire::decode_payload(*payload);
      const auto* hello = std::get_if<wire::Hello>(&m);
      if (!hello) return false;
      if (hello->version != wire::kProtocolVersion) {
        conn.send(wire::Error{0, ErrorCode::version_mismatch,
                              "unsupported protocol version " + std::to_string(hello->version) + ", expected " +
                                  std::to_string(wire::kProtocolVersion)});
        return false;
      }
      return conn.send(wire::HelloOk{});
    }
    auto left = std::chrono::duration_cast<net::Millis>(deadline - std::chrono::steady_clock::now());
    if (stopping_ || left.count() <= 0) return false;
    if (!conn.stream().wait_readable(std::min(left, kPollSlice))) continue;
    std::size_t n = conn.stream().recv_some(buf, sizeof buf);
    if (n == 0) return false;
    decoder.feed(std::string_view(buf, n));
  }
}

void MessageServer::serve(const std::shared_ptr<Connection>& conn) {
  wire::FrameDecoder decoder;
  try {
    if (!handshake(*conn, decoder)) {
      conn->shutdown();
      return;
    }
    std::vector<char> buf(64 * 1024);
    for (;;) {
      while (auto payload = decoder.next_payload()) {
        wire::Message m;
        try {
          m = wire::decode_payload(*payload);
        } catch (const wire::WireError& e) {
          if (auto id = wire::recover_request_id(*payload)) {
            conn->send(wire::Error{*id, ErrorCode::parse_error, e.what()});
            continue;
          }
          conn->shutdown();
          return;
        }
        if (auto* eval = std::get_if<wire::Eval>(&m)) {
          on_eval(conn, std::move(*eval));
        } else if (std::holds_alternative<wire::Ping>(m)) {
          conn->send(wire::Pong{});
        } else {
          conn->shutdown();
          return;
        }
      }
      if (stopping_ || !conn->alive()) break;
      if (!conn->stream().wait_readable(kPollSlice)) continue;
      std::size_t n = conn->stream().recv_some(buf.data(), buf.size());
      if (n == 0) break;
      decoder.feed(std::string_view(buf.data(), n));
    }
  } catch (const std::exception&) {
    // Oversize frames and socket errors end the connection.
  }
  conn->shutdown();
}

}  // namespace qx
