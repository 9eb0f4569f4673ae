#include "qx/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <sstream>

#include "qx/syntax.hpp"

namespace qx {

SweepJob make_sweep(const Expr& templ, const Ident& param, const std::vector<HostValue>& values,
                    std::size_t max_requeues) {
  for (const auto& name : free_vars(templ)) {
    if (name != param && !find_builtin(name)) throw SweepError("template has free variable " + name);
  }
  if (values.empty()) throw SweepError("sweep needs at least one value");
  SweepJob job{templ, param, {}, std::nullopt, max_requeues};
  job.tasks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      job.tasks.push_back(substitute(templ, param, lift(values[i])));
    } catch (const UnliftableValue& e) {
      throw SweepError("value " + std::to_string(i) + ": " + e.what());
    }
  }
  return job;
}

// --- task queue ----------------------------------------------------------

TaskQueue::TaskQueue(std::size_t n, std::size_t max_requeues)
    : max_requeues_(max_requeues), state_(n, State::pending), worker_(n, 0), requeues_(n, 0), results_(n) {
  pending_.reserve(n);
  for (std::size_t i = n; i-- > 0;) pending_.push_back(i);
}

std::optional<std::size_t> TaskQueue::take(std::size_t worker) {
  if (pending_.empty()) return std::nullopt;
  std::size_t i = pending_.back();
  pending_.pop_back();
  state_[i] = State::in_flight;
  worker_[i] = worker;
  ++in_flight_;
  return i;
}

void TaskQueue::complete(std::size_t i, Outcome result) {
  if (state_.at(i) != State::in_flight) throw std::logic_error("task " + std::to_string(i) + " is not in flight");
  state_[i] = State::completed;
  results_[i] = std::move(result);
  --in_flight_;
  ++completed_;
}

bool TaskQueue::requeue(std::size_t i) {
  if (state_.at(i) != State::in_flight) throw std::logic_error("task " + std::to_string(i) + " is not in flight");
  if (requeues_[i] >= max_requeues_) return false;
  ++requeues_[i];
  state_[i] = State::pending;
  --in_flight_;
  pending_.insert(std::upper_bound(pending_.begin(), pending_.end(), i, std::greater<>()), i);
  return true;
}

std::vector<Outcome> TaskQueue::take_results() {
  if (!done()) throw std::logic_error("sweep has unresolved tasks");
  std::vector<Outcome> out;
  out.reserve(results_.size());
  for (auto& r : results_) out.push_back(std::move(*r));
  return out;
}

// --- running -------------------------------------------------------------

std::vector<Outcome> run_sweep(const SweepJob& job, RExecutor& x, SweepStats* stats) {
  struct Shared {
    Shared(std::size_t n, std::size_t max_requeues) : queue(n, max_requeues) {}
    std::mutex mu;
    std::condition_variable cv;
    TaskQueue queue;
    std::size_t requeued = 0;
    std::optional<TransportError> abort;
  };
  auto st = std::make_shared<Shared>(job.tasks.size(), job.max_requeues);

  std::unique_lock lk(st->mu);
  for (;;) {
    std::size_t window = std::max<std::size_t>(1, x.window());
    st->cv.wait(lk, [&] {
      if (st->queue.done()) return true;
      if (st->abort) return st->queue.in_flight() == 0;
      return st->queue.pending() > 0 && st->queue.in_flight() < window;
    });
    if (st->abort && st->queue.in_flight() == 0) throw SweepAborted(*st->abort);
    if (st->queue.done()) break;
    std::size_t i = *st->queue.take();
    lk.unlock();
    x.submit(job.tasks[i], job.fuel, [st, i, &x](Outcome o) {
      bool lost = false;
      if (auto* t = std::get_if<TransportError>(&o)) {
        lost = t->kind == TransportError::Kind::no_workers && x.healthy_workers() == 0;
      }
      std::lock_guard g(st->mu);
      if (auto* t = std::get_if<TransportError>(&o)) {
        if (lost) {
          if (!st->abort) st->abort = *t;
        } else if (st->queue.requeue(i)) {
          ++st->requeued;
          st->cv.notify_all();
          return;
        }
      }
      st->queue.complete(i, std::move(o));
      st->cv.notify_all();
    });
    lk.lock();
  }
  if (stats) stats->requeued = st->requeued;
  return st->queue.take_results();
}

// --- Mandelbrot ----------------------------------------------------------

void MandelSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be at least 1x1");
  if (!(view_w > 0) || !std::isfinite(view_w)) throw std::invalid_argument("view width must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw std::invalid_argument("center must be finite");
  if (max_iter < 1) throw std::invalid_argument("max-iter must be at least 1");
  if (rows_per_task < 1) throw std::invalid_argument("rows-per-task must be at least 1");
}

namespace {

Expr f(double d) { return lit_float(d); }

// esc zr zi cr ci n, curried.
Expr escape_fn(std::int64_t max_iter) {
  Expr zr2 = call("mul", {var("zr"), var("zr")});
  Expr zi2 = call("mul", {var("zi"), var("zi")});
  Expr next_r = call("add", {call("sub", {zr2, zi2}), var("cr")});
  Expr next_i = call("add", {call("mul", {call("mul", {f(2.0), var("zr")}), var("zi")}), var("ci")});
  Expr step = call("esc", {next_r, next_i, var("cr"), var("ci"), call("add", {var("n"), lit_int(1)})});
  Expr body = if_then_else(call("ge", {var("n"), lit_int(max_iter)}), lit_int(max_iter),
                           if_then_else(call("gt", {call("add", {zr2, zi2}), f(4.0)}), var("n"), step));
  return lam("zr", lam("zi", lam("cr", lam("ci", lam("n", body)))));
}

// center + (p + 0.5 - extent/2) * view_w / width, with `sign` choosing
// add for the real axis and sub for the imaginary one.
Expr plane(const char* sign, double center, const char* p, double extent, double view_w, double width) {
  Expr offset = call("sub", {call("add", {call("toFloat", {var(p)}), f(0.5)}), f(extent / 2.0)});
  return call(sign, {f(center), call("div", {call("mul", {offset, f(view_w)}), f(width)})});
}

}  // namespace

Expr mandel_row_expr(const MandelSpec& spec, int row_start, int row_count) {
  spec.validate();
  if (row_start < 0 || row_count < 1 || row_start + row_count > spec.height) {
    throw std::out_of_range("rows " + std::to_string(row_start) + "+" + std::to_string(row_count) +
                            " outside image of height " + std::to_string(spec.height));
  }
  const double w = spec.width;
  const double h = spec.height;
  Expr pixel = lam("px", call("esc", {f(0.0), f(0.0), plane("add", spec.cx, "px", w, spec.view_w, w), var("ci"),
                                      lit_int(0)}));
  Expr row = lam("py", let_in("ci", plane("sub", spec.cy, "py", h, spec.view_w, w),
                              call("map", {pixel, call("range", {lit_int(0), lit_int(spec.width - 1)})})));
  Expr rows = call("map", {var("row"), call("range", {lit_int(row_start), lit_int(row_start + row_count - 1)})});
  Expr flat = call("foldl", {lam("acc", lam("r", call("append", {var("acc"), var("r")}))), list_of({}), rows});
  return letrec_in("esc", escape_fn(spec.max_iter), let_in("row", row, flat));
}

std::uint64_t mandel_task_fuel(const MandelSpec& spec, int row_count) {
  // One escape iteration visits under 80 nodes; a pixel adds under 60.
  auto pixels = static_cast<std::uint64_t>(row_count) * static_cast<std::uint64_t>(spec.width);
  return pixels * (static_cast<std::uint64_t>(spec.max_iter) + 1) * 80 + pixels * 60 +
         static_cast<std::uint64_t>(row_count) * 100 + 10'000;
}

std::vector<std::int64_t> mandel_counts(const MandelSpec& spec, RExecutor& x) {
  spec.validate();
  std::vector<Expr> tasks;
  std::vector<int> starts;
  for (int r = 0; r < spec.height; r += spec.rows_per_task) {
    int n = std::min(spec.rows_per_task, spec.height - r);
    starts.push_back(r);
    tasks.push_back(mandel_row_expr(spec, r, n));
  }
  SweepJob job{lit_unit(), "row", std::move(tasks), mandel_task_fuel(spec, spec.rows_per_task), 2};
  auto results = run_sweep(job, x);

  std::vector<std::int64_t> counts;
  counts.reserve(static_cast<std::size_t>(spec.width) * spec.height);
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto* v = std::get_if<Value>(&results[t]);
    if (!v) throw SweepError("rows from " + std::to_string(starts[t]) + ": " + describe(results[t]));
    const auto* l = v->get_if<ListRef>();
    if (!l) throw SweepError("rows from " + std::to_string(starts[t]) + ": not a list");
    for (const auto& c : list_items(*l)) {
      const auto* n = c.get_if<std::int64_t>();
      if (!n || *n < 0 || *n > spec.max_iter) throw SweepError("rows from " + std::to_string(starts[t]) + ": bad count");
      counts.push_back(*n);
    }
  }
  if (counts.size() != static_cast<std::size_t>(spec.width) * spec.height) {
    throw SweepError("expected " + std::to_string(spec.width * spec.height) + " counts, got " +
                     std::to_string(counts.size()));
  }
  return counts;
}

std::string encode_ppm(const MandelSpec& spec, const std::vector<std::int64_t>& counts) {
  std::string out = "P6\n" + std::to_string(spec.width) + " " + std::to_string(spec.height) + "\n255\n";
  out.reserve(out.size() + counts.size() * 3);
  for (auto c : counts) {
    auto v = static_cast<char>(static_cast<unsigned char>(255 * c / spec.max_iter));
    out.append(3, v);
  }
  return out;
}

void render_mandel(const MandelSpec& spec, RExecutor& x, const std::string& path) {
  std::string bytes = encode_ppm(spec, mandel_counts(spec, x));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

// --- benchmark -----------------------------------------------------------

Expr spin_task(std::int64_t depth, std::int64_t tag) {
  Expr loop = lam("n", if_then_else(call("le", {var("n"), lit_int(0)}), lit_int(tag),
                                    app(var("spin"), call("sub", {var("n"), lit_int(1)}))));
  return letrec_in("spin", loop, app(var("spin"), lit_int(depth)));
}

std::vector<BenchRow> benchmark_sweep(std::size_t items, std::int64_t spin_depth,
                                      const std::vector<std::size_t>& worker_counts,
                                      const std::function<RExecutor(std::size_t)>& connect, int runs) {
  using Clock = std::chrono::steady_clock;
  std::vector<Expr> tasks;
  for (std::size_t i = 0; i < items; ++i) tasks.push_back(spin_task(spin_depth, static_cast<std::int64_t>(i)));
  SweepJob job{lit_unit(), "i", std::move(tasks), static_cast<std::uint64_t>(spin_depth) * 20 + 1000, 2};

  std::vector<BenchRow> rows;
  for (std::size_t w : worker_counts) {
    RExecutor x = connect(w);
    std::vector<double> times;
    for (int r = 0; r < std::max(1, runs); ++r) {
      auto t0 = Clock::now();
      auto results = run_sweep(job, x);
      times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto* v = std::get_if<Value>(&results[i]);
        const auto* n = v ? v->get_if<std::int64_t>() : nullptr;
        if (!n || *n != static_cast<std::int64_t>(i)) {
          throw SweepError("benchmark item " + std::to_string(i) + ": " + describe(results[i]));
        }
      }
    }
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];
    double base = rows.empty() ? median : rows.front().seconds;
    rows.push_back(BenchRow{w, median, base / median});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "workers,seconds,speedup\n";
  out.setf(std::ios::fixed);
  for (const auto& r : rows) {
    out.precision(4);
    out << r.workers << ',' << r.seconds << ',';
    out.precision(3);
    out << r.speedup << '\n';
  }
  return out.str();
}

}  // namespace qx
