#include <condition_variable>
#include <deque>

#include "qx/cluster.hpp"
#include "server.hpp"

namespace qx {

namespace {

struct Task {
  std::shared_ptr<Connection> conn;
  wire::Eval eval;
};

wire::Message answer(const wire::Eval& req, std::uint64_t default_fuel) {
  auto r = evaluate_to_literal(req.expr, Fuel{req.fuel.value_or(default_fuel)});
  if (auto* err = std::get_if<EvalError>(&r)) return wire::Error{req.id, err->code, err->detail};
  return wire::Result{req.id, std::get<Expr>(std::move(r))};
}

}  // namespace

struct WorkerServer::Impl final : MessageServer {
  explicit Impl(WorkerConfig c) : MessageServer(c.handshake_timeout), cfg(std::move(c)) {
    if (cfg.concurrency == 0) throw std::invalid_argument("worker concurrency must be at least 1");
    if (cfg.fuel == 0) throw std::invalid_argument("worker fuel must be positive");
  }

  void on_eval(const std::shared_ptr<Connection>& conn, wire::Eval eval) override {
    {
      std::lock_guard lk(mu);
      if (queue.size() < cfg.max_queue) {
        queue.push_back(Task{conn, std::move(eval)});
        cv.notify_one();
        return;
      }
      ++rejected;
    }
    conn->send(wire::Error{eval.id, ErrorCode::overloaded,
                           "worker queue is full (" + std::to_string(cfg.max_queue) + " pending)"});
  }

  void execute() {
    for (;;) {
      std::optional<Task> next;
      {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return halting || !queue.empty(); });
        if (halting) return;
        next.emplace(std::move(queue.front()));
        queue.pop_front();
        ++running;
      }
      Task& task = *next;
      if (task.conn->alive()) {
        wire::Message reply = answer(task.eval, cfg.fuel);
        try {
          task.conn->send(reply);
        } catch (const wire::WireError&) {
          task.conn->send(wire::Error{task.eval.id, ErrorCode::unliftable_result, "result exceeds the frame size limit"});
        }
      }
      std::lock_guard lk(mu);
      --running;
      ++completed;
    }
  }

  WorkerConfig cfg;
  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<Task> queue;
  std::size_t running = 0;
  std::uint64_t completed = 0;
  std::uint64_t rejected = 0;
  bool halting = false;
  std::vector<std::thread> executors;
  bool started = false;
};

WorkerServer::WorkerServer(WorkerConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

WorkerServer::~WorkerServer() { stop(); }

net::Endpoint WorkerServer::start() {
  if (impl_->started) throw std::logic_error("worker already started");
  impl_->started = true;
  for (std::size_t i = 0; i < impl_->cfg.concurrency; ++i) impl_->executors.emplace_back([this] { impl_->execute(); });
  return impl_->MessageServer::start(impl_->cfg.listen);
}

void WorkerServer::stop() {
  if (!impl_->started) return;
  impl_->started = false;
  impl_->MessageServer::stop();
  {
    std::lock_guard lk(impl_->mu);
    impl_->halting = true;
    impl_->queue.clear();
  }
  impl_->cv.notify_all();
  for (auto& t : impl_->executors) t.join();
  impl_->executors.clear();
}

WorkerServer::Stats WorkerServer::stats() const {
  std::lock_guard lk(impl_->mu);
  return Stats{impl_->running, impl_->queue.size(), impl_->completed, impl_->rejected};
}

}  // namespace qx
