#include "qx/channel.hpp"

#include <stdexcept>
#include <vector>

namespace qx {

namespace {

constexpr net::Millis kPollSlice{100};

}  // namespace

std::string_view to_string(TransportError::Kind kind) {
  switch (kind) {
    case TransportError::Kind::unreachable: return "unreachable";
    case TransportError::Kind::timeout: return "timeout";
    case TransportError::Kind::no_workers: return "no-workers";
    case TransportError::Kind::exhausted: return "retries-exhausted";
    case TransportError::Kind::protocol: return "protocol";
  }
  return "?";
}

Channel::Channel(net::Endpoint peer, net::TcpStream stream) : peer_(std::move(peer)), stream_(std::move(stream)) {}

Channel::~Channel() {
  {
    std::lock_guard lk(join_mu_);
    if (reader_.joinable()) {
      if (reader_.get_id() == std::this_thread::get_id()) {
        reader_.detach();
      } else {
        stream_.shutdown();
        reader_.join();
      }
    }
  }
  stream_.close();
}

std::shared_ptr<Channel> Channel::open(const net::Endpoint& peer, net::Millis handshake_timeout) {
  auto deadline = Clock::now() + handshake_timeout;
  net::TcpStream stream = net::TcpStream::connect(peer, handshake_timeout);
  std::shared_ptr<Channel> ch(new Channel(peer, std::move(stream)));
  ch->stream_.send_all(wire::encode_message(wire::Hello{}));

  char buf[4096];
  for (;;) {
    if (auto m = ch->decoder_.next()) {
      if (const auto* ok = std::get_if<wire::HelloOk>(&*m); ok && ok->version == wire::kProtocolVersion) break;
      if (const auto* err = std::get_if<wire::Error>(&*m)) {
        throw std::runtime_error("handshake with " + peer.to_string() + " refused: " +
                                 std::string(to_string(err->code)) + " " + err->detail);
      }
      throw std::runtime_error("handshake with " + peer.to_string() + ": unexpected reply");
    }
    auto left = std::chrono::duration_cast<net::Millis>(deadline - Clock::now());
    if (left.count() <= 0 || !ch->stream_.wait_readable(left)) {
      throw net::NetError("handshake with " + peer.to_string() + " timed out");
    }
    std::size_t n = ch->stream_.recv_some(buf, sizeof buf);
    if (n == 0) throw net::NetError("handshake with " + peer.to_string() + ": connection closed");
    ch->decoder_.feed(std::string_view(buf, n));
  }
  ch->start_reader();
  return ch;
}

void Channel::start_reader() {
  reader_ = std::thread([self = shared_from_this()] { self->read_loop(); });
}

void Channel::read_loop() {
  char buf[64 * 1024];
  try {
    for (;;) {
      {
        std::lock_guard lk(mu_);
        if (broken_) return;
      }
      bool ready = stream_.wait_readable(kPollSlice);
      expire(Clock::now());
      if (!ready) continue;
      std::size_t n = stream_.recv_some(buf, sizeof buf);
      if (n == 0) {
        fail_all("connection to " + peer_.to_string() + " closed");
        return;
      }
      decoder_.feed(std::string_view(buf, n));
      while (auto m = decoder_.next()) {
        if (!dispatch(*m)) {
          fail_all("unexpected message from " + peer_.to_string());
          return;
        }
      }
    }
  } catch (const std::exception& e) {
    fail_all(std::string("connection to ") + peer_.to_string() + " failed: " + e.what());
  }
}

bool Channel::dispatch(const wire::Message& m) {
  auto take = [&](std::uint64_t id) -> Callback {
    std::lock_guard lk(mu_);
    auto it = pending_.find(id);
    if (it == pending_.end()) return nullptr;
    Callback cb = std::move(it->second.done);
    pending_.erase(it);
    return cb;
  };
  if (const auto* r = std::get_if<wire::Result>(&m)) {
    if (auto cb = take(r->id)) cb(*r);
    return true;
  }
  if (const auto* e = std::get_if<wire::Error>(&m)) {
    if (auto cb = take(e->id)) {
      cb(*e);
      return true;
    }
    // Id 0 is never issued; an error addressed to it concerns the whole
    // connection.
    return e->id != 0;
  }
  if (std::holds_alternative<wire::Pong>(m)) {
    std::function<void(bool)> cb;
    {
      std::lock_guard lk(mu_);
      if (pings_.empty()) return true;
      cb = std::move(pings_.front().done);
      pings_.pop_front();
    }
    cb(true);
    return true;
  }
  return false;
}

void Channel::expire(Clock::time_point now) {
  std::vector<Callback> calls;
  std::vector<std::function<void(bool)>> pings;
  {
    std::lock_guard lk(mu_);
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (it->second.deadline <= now) {
        calls.push_back(std::move(it->second.done));
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    while (!pings_.empty() && pings_.front().deadline <= now) {
      pings.push_back(std::move(pings_.front().done));
      pings_.pop_front();
    }
  }
  for (auto& cb : calls) cb(TransportError{TransportError::Kind::timeout, "no reply from " + peer_.to_string()});
  for (auto& cb : pings) cb(false);
}

void Channel::fail_all(const std::string& why) {
  std::map<std::uint64_t, Pending> calls;
  std::deque<PendingPing> pings;
  {
    std::lock_guard lk(mu_);
    if (!broken_) {
      broken_ = true;
      broken_reason_ = why;
    }
    calls.swap(pending_);
    pings.swap(pings_);
  }
  stream_.shutdown();
  for (auto& [id, p] : calls) p.done(TransportError{TransportError::Kind::unreachable, why});
  for (auto& p : pings) p.done(false);
}

bool Channel::send(const std::string& frame) {
  std::lock_guard lk(write_mu_);
  try {
    stream_.send_all(frame);
    return true;
  } catch (const net::NetError&) {
    return false;
  }
}

void Channel::call(const Expr& expr, std::optional<std::uint64_t> fuel, net::Millis timeout, Callback done) {
  std::uint64_t id;
  std::string reason;
  {
    std::lock_guard lk(mu_);
    if (broken_) reason = broken_reason_;
    id = next_id_++;
  }
  if (!reason.empty()) return done(TransportError{TransportError::Kind::unreachable, reason});

  std::string frame;
  try {
    frame = wire::encode_message(wire::Eval{id, expr, fuel});
  } catch (const wire::WireError& e) {
    return done(TransportError{TransportError::Kind::protocol, e.what()});
  }
  {
    std::lock_guard lk(mu_);
    if (broken_) {
      reason = broken_reason_;
    } else {
      pending_.emplace(id, Pending{std::move(done), Clock::now() + timeout});
    }
  }
  if (!reason.empty()) return done(TransportError{TransportError::Kind::unreachable, reason});
  if (!send(frame)) fail_all("send to " + peer_.to_string() + " failed");
}

void Channel::ping(net::Millis timeout, std::function<void(bool)> done) {
  {
    std::lock_guard lk(mu_);
    if (!broken_) {
      pings_.push_back(PendingPing{std::move(done), Clock::now() + timeout});
      done = nullptr;
    }
  }
  if (done) return done(false);
  if (!send(wire::encode_message(wire::Ping{}))) fail_all("send to " + peer_.to_string() + " failed");
}

bool Channel::broken() const {
  std::lock_guard lk(mu_);
  return broken_;
}

void Channel::abort() { fail_all("channel closed"); }

void Channel::close() {
  abort();
  std::lock_guard lk(join_mu_);
  if (reader_.joinable() && reader_.get_id() != std::this_thread::get_id()) reader_.join();
}

}  // namespace qx
