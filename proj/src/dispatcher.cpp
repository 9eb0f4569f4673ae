#include <future>

#include "qx/cluster.hpp"
#include "server.hpp"

namespace qx {

namespace {

constexpr std::string_view kNoWorkers = "no healthy workers";

struct Request {
  Expr expr;
  std::optional<std::uint64_t> fuel;
  Dispatcher::Callback done;
  std::size_t attempts = 0;
};

bool ping_blocking(Channel& ch, net::Millis timeout) {
  auto alive = std::make_shared<std::promise<bool>>();
  auto result = alive->get_future();
  ch.ping(timeout, [alive](bool ok) { alive->set_value(ok); });
  return result.get();
}

}  // namespace

struct Dispatcher::Impl : std::enable_shared_from_this<Impl> {
  Impl(std::vector<net::Endpoint> workers, DispatcherOptions o)
      : opts(o), pool(std::move(workers)), links(pool.size()), sent(pool.size(), 0) {}

  void connect_all() {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::shared_ptr<Channel> ch;
      try {
        ch = Channel::open(pool.endpoint(i), opts.handshake_timeout);
      } catch (const std::exception&) {
      }
      std::lock_guard lk(mu);
      links[i] = ch;
      pool.set_healthy(i, ch != nullptr);
    }
  }

  void attempt(const std::shared_ptr<Request>& req) {
    std::size_t w = 0;
    std::shared_ptr<Channel> ch;
    {
      std::unique_lock lk(mu);
      if (closing) {
        lk.unlock();
        return req->done(TransportError{TransportError::Kind::unreachable, "dispatcher is shutting down"});
      }
      try {
        w = pool.schedule();
      } catch (const NoHealthyWorkers&) {
        lk.unlock();
        return req->done(TransportError{TransportError::Kind::no_workers, std::string(kNoWorkers)});
      }
      ch = links[w];
      pool.begin_request(w);
      ++sent[w];
    }
    ++req->attempts;
    ch->call(req->expr, req->fuel, opts.request_timeout,
             [self = shared_from_this(), req, w, ch](Reply r) { self->on_reply(req, w, ch, std::move(r)); });
  }

  void on_reply(const std::shared_ptr<Request>& req, std::size_t w, const std::shared_ptr<Channel>& ch, Reply r) {
    {
      std::lock_guard lk(mu);
      pool.end_request(w);
    }
    if (auto* res = std::get_if<wire::Result>(&r)) return req->done(std::move(res->value));
    if (auto* err = std::get_if<wire::Error>(&r)) {
      if (is_eval_error_code(err->code)) return req->done(EvalError{err->code, std::move(err->detail)});
      if (err->code == ErrorCode::overloaded) {
        return retry(req, TransportError{TransportError::Kind::exhausted, pool_endpoint(w) + ": " + err->detail});
      }
      return req->done(TransportError{TransportError::Kind::protocol, std::string(to_string(err->code)) + ": " + err->detail});
    }
    mark_unhealthy(w, ch);
    retry(req, std::get<TransportError>(std::move(r)));
  }

  void retry(const std::shared_ptr<Request>& req, TransportError last) {
    if (req->attempts <= opts.retry_limit) return attempt(req);
    last.detail = "gave up after " + std::to_string(req->attempts) + " attempts; last: " + last.detail;
    last.kind = TransportError::Kind::exhausted;
    req->done(std::move(last));
  }

  std::string pool_endpoint(std::size_t w) {
    std::lock_guard lk(mu);
    return pool.endpoint(w).to_string();
  }

  void mark_unhealthy(std::size_t w, const std::shared_ptr<Channel>& ch) {
    {
      std::lock_guard lk(mu);
      if (links[w] == ch) {
        links[w] = nullptr;
        pool.set_healthy(w, false);
      }
    }
    ch->abort();
  }

  void probe() {
    std::vector<std::shared_ptr<Channel>> snapshot;
    std::vector<net::Endpoint> endpoints;
    {
      std::lock_guard lk(mu);
      if (closing) return;
      snapshot = links;
      for (std::size_t i = 0; i < pool.size(); ++i) endpoints.push_back(pool.endpoint(i));
    }
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
      if (snapshot[i] && !snapshot[i]->broken()) {
        if (!ping_blocking(*snapshot[i], opts.handshake_timeout)) mark_unhealthy(i, snapshot[i]);
        continue;
      }
      if (snapshot[i]) mark_unhealthy(i, snapshot[i]);
      std::shared_ptr<Channel> ch;
      try {
        ch = Channel::open(endpoints[i], opts.handshake_timeout);
        if (!ping_blocking(*ch, opts.handshake_timeout)) {
          ch->close();
          continue;
        }
      } catch (const std::exception&) {
        continue;
      }
      std::unique_lock lk(mu);
      if (closing || links[i]) {
        lk.unlock();
        ch->close();
        continue;
      }
      links[i] = ch;
      pool.set_healthy(i, true);
    }
  }

  void probe_loop() {
    std::unique_lock lk(mu);
    while (!closing) {
      probe_cv.wait_for(lk, opts.probe_interval, [&] { return closing; });
      if (closing) break;
      lk.unlock();
      probe();
      lk.lock();
    }
  }

  void shutdown() {
    std::vector<std::shared_ptr<Channel>> all;
    {
      std::lock_guard lk(mu);
      closing = true;
      all = links;
      for (std::size_t i = 0; i < links.size(); ++i) {
        links[i] = nullptr;
        pool.set_healthy(i, false);
      }
    }
    probe_cv.notify_all();
    if (prober.joinable()) prober.join();
    for (auto& ch : all) {
      if (ch) ch->close();
    }
  }

  DispatcherOptions opts;
  mutable std::mutex mu;
  std::condition_variable probe_cv;
  PoolState pool;
  std::vector<std::shared_ptr<Channel>> links;
  std::vector<std::uint64_t> sent;
  bool closing = false;
  std::thread prober;
};

Dispatcher::Dispatcher(std::vector<net::Endpoint> workers, DispatcherOptions opts)
    : impl_(std::make_shared<Impl>(std::move(workers), opts)) {
  impl_->connect_all();
  impl_->prober = std::thread([impl = impl_.get()] { impl->probe_loop(); });
}

Dispatcher::~Dispatcher() { impl_->shutdown(); }

void Dispatcher::submit(const Expr& e, std::optional<std::uint64_t> fuel, Callback done) {
  impl_->attempt(std::make_shared<Request>(Request{e, fuel, std::move(done)}));
}

std::size_t Dispatcher::size() const {
  std::lock_guard lk(impl_->mu);
  return impl_->pool.size();
}

std::size_t Dispatcher::healthy_count() const {
  std::lock_guard lk(impl_->mu);
  return impl_->pool.healthy_count();
}

std::vector<std::uint64_t> Dispatcher::sent_counts() const {
  std::lock_guard lk(impl_->mu);
  return impl_->sent;
}

void Dispatcher::probe_now() { impl_->probe(); }

// --- server --------------------------------------------------------------

struct DispatcherServer::Impl final : MessageServer {
  Impl(net::Endpoint at, std::vector<net::Endpoint> workers, DispatcherOptions opts)
      : MessageServer(opts.handshake_timeout), listen(std::move(at)), dispatcher(std::move(workers), opts) {}

  void on_eval(const std::shared_ptr<Connection>& conn, wire::Eval eval) override {
    std::uint64_t id = eval.id;
    dispatcher.submit(eval.expr, eval.fuel, [conn, id](DispatchResult r) {
      if (!conn->alive()) return;
      if (auto* lit = std::get_if<Expr>(&r)) {
        conn->send(wire::Result{id, std::move(*lit)});
      } else if (auto* err = std::get_if<EvalError>(&r)) {
        conn->send(wire::Error{id, err->code, err->detail});
      } else {
        const auto& t = std::get<TransportError>(r);
        // Clients treat overloaded as "no answer, safe to resubmit".
        std::string detail = t.kind == TransportError::Kind::no_workers ? std::string(kNoWorkers) : t.detail;
        conn->send(wire::Error{id, ErrorCode::overloaded, detail});
      }
    });
  }

  net::Endpoint listen;
  Dispatcher dispatcher;
  bool started = false;
};

DispatcherServer::DispatcherServer(net::Endpoint listen, std::vector<net::Endpoint> workers, DispatcherOptions opts)
    : impl_(std::make_unique<Impl>(std::move(listen), std::move(workers), opts)) {}

DispatcherServer::~DispatcherServer() { stop(); }

net::Endpoint DispatcherServer::start() {
  impl_->started = true;
  return impl_->MessageServer::start(impl_->listen);
}

void DispatcherServer::stop() {
  if (!impl_->started) return;
  impl_->started = false;
  impl_->MessageServer::stop();
}

Dispatcher& DispatcherServer::dispatcher() { return impl_->dispatcher; }

}  // namespace qx
