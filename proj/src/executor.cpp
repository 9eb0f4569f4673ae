#include <condition_variable>
#include <deque>
#include <future>

#include "qx/cluster.hpp"
#include "qx/syntax.hpp"

namespace qx {

namespace {

Outcome from_literal(std::variant<Expr, EvalError> r) {
  if (auto* err = std::get_if<EvalError>(&r)) return std::move(*err);
  return literal_to_value(std::get<Expr>(r));
}

Outcome from_dispatch(DispatchResult r) {
  if (auto* lit = std::get_if<Expr>(&r)) return literal_to_value(*lit);
  if (auto* err = std::get_if<EvalError>(&r)) return std::move(*err);
  return std::get<TransportError>(std::move(r));
}

}  // namespace

std::string describe(const Outcome& o) {
  if (const auto* v = std::get_if<Value>(&o)) {
    auto lit = value_to_expr(*v);
    if (auto* e = std::get_if<Expr>(&lit)) return print_expr(*e);
    return describe(*v);
  }
  if (const auto* err = std::get_if<EvalError>(&o)) {
    return "(error " + std::string(to_string(err->code)) + " " + quote_string(err->detail) + ")";
  }
  const auto& t = std::get<TransportError>(o);
  return "(error transport " + quote_string(std::string(to_string(t.kind)) + ": " + t.detail) + ")";
}

struct RExecutor::Backend {
  virtual ~Backend() = default;
  virtual void submit(const Expr& e, std::optional<std::uint64_t> fuel, Callback done) = 0;
  virtual std::size_t window() const = 0;
  virtual std::size_t healthy() const = 0;
  virtual Dispatcher* dispatcher() { return nullptr; }
};

namespace {

class LocalBackend final : public RExecutor::Backend {
 public:
  explicit LocalBackend(const ExecutorOptions& opts) : fuel_(opts.fuel.value_or(kDefaultFuel)) {
    std::size_t n = opts.local_threads ? opts.local_threads : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < n; ++i) threads_.emplace_back([this] { work(); });
  }

  ~LocalBackend() override {
    {
      std::lock_guard lk(mu_);
      halting_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void submit(const Expr& e, std::optional<std::uint64_t> fuel, RExecutor::Callback done) override {
    {
      std::lock_guard lk(mu_);
      queue_.push_back(Job{e, fuel.value_or(fuel_), std::move(done)});
    }
    cv_.notify_one();
  }

  std::size_t window() const override { return threads_.size() * 2; }
  std::size_t healthy() const override { return threads_.size(); }

 private:
  void work() {
    for (;;) {
      std::optional<Job> job;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return halting_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job.emplace(std::move(queue_.front()));
        queue_.pop_front();
      }
      // Same path as a worker: results cross as literals.
      job->done(from_literal(evaluate_to_literal(job->expr, Fuel{job->fuel})));
    }
  }

  struct Job {
    Expr expr;
    std::uint64_t fuel;
    RExecutor::Callback done;
  };

  std::uint64_t fuel_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Job> queue_;
  bool halting_ = false;
  std::vector<std::thread> threads_;
};

class EmbeddedBackend final : public RExecutor::Backend {
 public:
  EmbeddedBackend(std::vector<net::Endpoint> workers, const ExecutorOptions& opts)
      : fuel_(opts.fuel),
        per_worker_(std::max<std::size_t>(1, opts.per_worker_window)),
        dispatcher_(std::move(workers), DispatcherOptions{opts.retry_limit, opts.request_timeout,
                                                          opts.handshake_timeout, DispatcherOptions{}.probe_interval}) {}

  void submit(const Expr& e, std::optional<std::uint64_t> fuel, RExecutor::Callback done) override {
    dispatcher_.submit(e, fuel ? fuel : fuel_, [done = std::move(done)](DispatchResult r) { done(from_dispatch(std::move(r))); });
  }

  std::size_t window() const override { return std::max<std::size_t>(1, dispatcher_.healthy_count()) * per_worker_; }
  std::size_t healthy() const override { return dispatcher_.healthy_count(); }
  Dispatcher* dispatcher() override { return &dispatcher_; }

 private:
  std::optional<std::uint64_t> fuel_;
  std::size_t per_worker_;
  Dispatcher dispatcher_;
};

class RemoteBackend final : public RExecutor::Backend {
 public:
  RemoteBackend(net::Endpoint at, const ExecutorOptions& opts) : at_(std::move(at)), opts_(opts) {
    try {
      channel_ = Channel::open(at_, opts_.handshake_timeout);
    } catch (const std::exception&) {
      // Reported per request; the next submit tries again.
    }
  }

  ~RemoteBackend() override {
    std::shared_ptr<Channel> ch;
    {
      std::lock_guard lk(mu_);
      closing_ = true;
      ch = std::move(channel_);
    }
    if (ch) ch->close();
  }

  void submit(const Expr& e, std::optional<std::uint64_t> fuel, RExecutor::Callback done) override {
    attempt(std::make_shared<Req>(Req{e, fuel ? fuel : opts_.fuel, std::move(done), 0}));
  }

  std::size_t window() const override { return std::max<std::size_t>(1, opts_.remote_window); }

  std::size_t healthy() const override {
    std::lock_guard lk(mu_);
    return channel_ && !channel_->broken() ? 1 : 0;
  }

 private:
  struct Req {
    Expr expr;
    std::optional<std::uint64_t> fuel;
    RExecutor::Callback done;
    std::size_t attempts;
  };

  std::shared_ptr<Channel> connection(std::string& why) {
    std::lock_guard lk(mu_);
    if (closing_) {
      why = "client is shutting down";
      return nullptr;
    }
    if (channel_ && !channel_->broken()) return channel_;
    if (channel_) channel_->abort();
    channel_.reset();
    try {
      channel_ = Channel::open(at_, opts_.handshake_timeout);
    } catch (const std::exception& e) {
      why = e.what();
    }
    return channel_;
  }

  void attempt(const std::shared_ptr<Req>& req) {
    ++req->attempts;
    std::string why;
    auto ch = connection(why);
    if (!ch) return fail(req, TransportError{TransportError::Kind::unreachable, "dispatcher " + at_.to_string() + ": " + why});
    ch->call(req->expr, req->fuel, opts_.request_timeout, [this, req](Reply r) {
      if (auto* res = std::get_if<wire::Result>(&r)) return req->done(literal_to_value(res->value));
      if (auto* err = std::get_if<wire::Error>(&r)) {
        if (is_eval_error_code(err->code)) return req->done(EvalError{err->code, std::move(err->detail)});
        auto kind = err->code == ErrorCode::overloaded
                        ? (err->detail == "no healthy workers" ? TransportError::Kind::no_workers
                                                               : TransportError::Kind::exhausted)
                        : TransportError::Kind::protocol;
        // The dispatcher has already retried inside its pool.
        return req->done(TransportError{kind, std::string(to_string(err->code)) + ": " + err->detail});
      }
      fail(req, std::get<TransportError>(std::move(r)));
    });
  }

  void fail(const std::shared_ptr<Req>& req, TransportError t) {
    if (req->attempts <= opts_.retry_limit) return attempt(req);
    req->done(std::move(t));
  }

  net::Endpoint at_;
  ExecutorOptions opts_;
  mutable std::mutex mu_;
  std::shared_ptr<Channel> channel_;
  bool closing_ = false;
};

}  // namespace

RExecutor::RExecutor(std::unique_ptr<Backend> b) : impl_(std::move(b)) {}
RExecutor::RExecutor(RExecutor&&) noexcept = default;
RExecutor& RExecutor::operator=(RExecutor&&) noexcept = default;
RExecutor::~RExecutor() = default;

RExecutor RExecutor::remote(const net::Endpoint& dispatcher, ExecutorOptions opts) {
  return RExecutor(std::make_unique<RemoteBackend>(dispatcher, opts));
}

RExecutor RExecutor::embedded(std::vector<net::Endpoint> workers, ExecutorOptions opts) {
  return RExecutor(std::make_unique<EmbeddedBackend>(std::move(workers), opts));
}

RExecutor RExecutor::local(ExecutorOptions opts) { return RExecutor(std::make_unique<LocalBackend>(opts)); }

void RExecutor::submit(const Expr& e, Callback done) { impl_->submit(e, std::nullopt, std::move(done)); }

void RExecutor::submit(const Expr& e, std::optional<std::uint64_t> fuel, Callback done) {
  impl_->submit(e, fuel, std::move(done));
}

Outcome RExecutor::eval(const Expr& e) {
  auto slot = std::make_shared<std::promise<Outcome>>();
  auto result = slot->get_future();
  submit(e, [slot](Outcome o) { slot->set_value(std::move(o)); });
  return result.get();
}

std::vector<Outcome> RExecutor::eval_batch(const std::vector<Expr>& es) {
  struct State {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::optional<Outcome>> results;
    std::size_t in_flight = 0;
  };
  auto st = std::make_shared<State>();
  st->results.resize(es.size());

  for (std::size_t i = 0; i < es.size(); ++i) {
    {
      std::unique_lock lk(st->mu);
      st->cv.wait(lk, [&] { return st->in_flight < window(); });
      ++st->in_flight;
    }
    submit(es[i], [st, i](Outcome o) {
      std::lock_guard lk(st->mu);
      st->results[i] = std::move(o);
      --st->in_flight;
      st->cv.notify_all();
    });
  }
  std::unique_lock lk(st->mu);
  st->cv.wait(lk, [&] { return st->in_flight == 0; });
  std::vector<Outcome> out;
  out.reserve(es.size());
  for (auto& r : st->results) out.push_back(std::move(*r));
  return out;
}

std::size_t RExecutor::window() const { return impl_->window(); }
std::size_t RExecutor::healthy_workers() const { return impl_->healthy(); }
Dispatcher* RExecutor::dispatcher() { return impl_->dispatcher(); }

}  // namespace qx
