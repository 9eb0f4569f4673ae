#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qx/cluster.hpp"
#include "qx/expr.hpp"

namespace qx {

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A template with one hole, and the values to fill it with.
struct SweepJob {
  Expr templ;
  Ident param;
  /// tasks[i] = templ with param replaced by values[i].
  std::vector<Expr> tasks;
  /// Per-task budget; the executor's default when unset.
  std::optional<std::uint64_t> fuel;
  std::size_t max_requeues = 2;
};

/// Throws SweepError when the template has free variables other than
/// `param` and builtin names, when `values` is empty, or when a value
/// cannot be lifted.
SweepJob make_sweep(const Expr& templ, const Ident& param, const std::vector<HostValue>& values,
                    std::size_t max_requeues = 2);

/// Task bookkeeping for one sweep. Each index is pending, in flight or
/// completed. Not synchronized.
class TaskQueue {
 public:
  enum class State { pending, in_flight, completed };

  TaskQueue(std::size_t n, std::size_t max_requeues);

  /// Moves the lowest pending index to in-flight.
  std::optional<std::size_t> take(std::size_t worker = 0);
  void complete(std::size_t i, Outcome result);
  /// Returns an in-flight index to pending. False (and nothing changes) once
  /// the index has used up its requeues.
  bool requeue(std::size_t i);

  State state(std::size_t i) const { return state_.at(i); }
  std::size_t assigned(std::size_t i) const { return worker_.at(i); }
  std::size_t requeues(std::size_t i) const { return requeues_.at(i); }
  std::size_t size() const { return state_.size(); }
  std::size_t pending() const { return pending_.size(); }
  std::size_t in_flight() const { return in_flight_; }
  std::size_t completed() const { return completed_; }
  bool done() const { return completed_ == state_.size(); }
  /// Results by index; requires done().
  std::vector<Outcome> take_results();

 private:
  std::size_t max_requeues_;
  std::vector<State> state_;
  std::vector<std::size_t> worker_;
  std::vector<std::size_t> requeues_;
  std::vector<std::optional<Outcome>> results_;
  std::vector<std::size_t> pending_;  // kept sorted descending; back() is the lowest
  std::size_t in_flight_ = 0;
  std::size_t completed_ = 0;
};

/// The whole pool went away mid-sweep.
class SweepAborted : public std::runtime_error {
 public:
  explicit SweepAborted(TransportError e)
      : std::runtime_error("sweep aborted: " + std::string(to_string(e.kind)) + ": " + e.detail), error(std::move(e)) {}
  TransportError error;
};

struct SweepStats {
  std::size_t requeued = 0;
};

/// Runs every task, keeping up to x.window() in flight. Transport failures
/// put the task back on the queue until its requeues are used up, after
/// which the index carries the error. Throws SweepAborted when a task finds
/// no healthy worker and the executor confirms none is left.
std::vector<Outcome> run_sweep(const SweepJob& job, RExecutor& x, SweepStats* stats = nullptr);

// --- Mandelbrot ----------------------------------------------------------

struct MandelSpec {
  int width = 100;
  int height = 100;
  double cx = -0.5;
  double cy = 0.0;
  double view_w = 3.0;
  std::int64_t max_iter = 100;
  int rows_per_task = 5;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Closed quotation yielding the escape counts of rows
/// [row_start, row_start + row_count) as one flat row-major int list.
Expr mandel_row_expr(const MandelSpec& spec, int row_start, int row_count);

/// Fuel that comfortably covers mandel_row_expr for the given row count.
std::uint64_t mandel_task_fuel(const MandelSpec& spec, int row_count);

/// All counts, row-major, computed in tasks of spec.rows_per_task rows.
/// Throws SweepError if any task fails.
std::vector<std::int64_t> mandel_counts(const MandelSpec& spec, RExecutor& x);

/// Binary PPM (P6) of the counts as gray levels floor(255 * count / maxIter).
std::string encode_ppm(const MandelSpec& spec, const std::vector<std::int64_t>& counts);

/// mandel_counts then encode_ppm, written to `path`.
void render_mandel(const MandelSpec& spec, RExecutor& x, const std::string& path);

// --- benchmark -----------------------------------------------------------

struct BenchRow {
  std::size_t workers;
  double seconds;
  double speedup;
};

/// Sweeps `items` copies of a countdown of `spin_depth` steps over the
/// executor that `connect(w)` yields for each worker count, `runs` times,
/// keeping the median wall time. Speedup is the first entry's time over
/// each entry's time, so the first row (normally workers=1) reads 1.0.
std::vector<BenchRow> benchmark_sweep(std::size_t items, std::int64_t spin_depth,
                                      const std::vector<std::size_t>& worker_counts,
                                      const std::function<RExecutor(std::size_t)>& connect, int runs = 1);

/// The countdown task used by benchmark_sweep.
Expr spin_task(std::int64_t depth, std::int64_t tag);

/// `workers,seconds,speedup` header and one line per row.
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace qx
