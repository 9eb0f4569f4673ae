#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "common.hpp"
#include "process.hpp"
#include "qx/cluster.hpp"
#include "qx/forms.hpp"
#include "qx/jsgen.hpp"
#include "qx/sweep.hpp"
#include "qx/syntax.hpp"

namespace {

using namespace qx;
namespace t = qx::tools;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Target {
  std::string dispatcher;
  std::string workers;
  bool local = false;
  std::uint64_t fuel = 0;
  double timeout_s = 30;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dispatcher", dispatcher, "Dispatcher HOST:PORT");
    cmd->add_option("--workers", workers, "Worker list for an in-process dispatcher (default: $QX_WORKERS)");
    cmd->add_flag("--local", local, "Evaluate in this process");
    cmd->add_option("--fuel", fuel, "Step budget per request (default: the worker's)");
    cmd->add_option("--timeout", timeout_s, "Seconds to wait for one reply")->check(CLI::PositiveNumber);
  }

  RExecutor connect() const {
    ExecutorOptions opts;
    if (fuel) opts.fuel = fuel;
    opts.request_timeout = net::Millis(static_cast<long long>(timeout_s * 1000));
    int chosen = (local ? 1 : 0) + (!dispatcher.empty() ? 1 : 0) + (!workers.empty() ? 1 : 0);
    if (chosen > 1) throw UsageError("choose one of --local, --dispatcher and --workers");
    try {
      if (local) return RExecutor::local(opts);
      if (!dispatcher.empty()) return RExecutor::remote(net::Endpoint::parse(dispatcher), opts);
      std::string list = workers.empty() ? t::env("QX_WORKERS").value_or("") : workers;
      auto pool = net::parse_endpoints(list);
      if (pool.empty()) throw UsageError("no executor: pass --local, --dispatcher or --workers (or set QX_WORKERS)");
      return RExecutor::embedded(std::move(pool), opts);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

std::string read_source(const std::string& path) {
  std::stringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    ss << in.rdbuf();
  }
  return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
  if (path == "-") {
    std::cout << data << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open " + path + " for writing");
  out << data;
  if (!out.flush()) throw std::runtime_error("write to " + path + " failed");
}

int exit_code(const Outcome& o) {
  if (std::holds_alternative<Value>(o)) return t::ok;
  return std::holds_alternative<EvalError>(o) ? t::eval_error : t::transport;
}

// 1, -2, 2.5, true, false, lo..hi; anything else is a string.
std::vector<HostValue> parse_values(const std::string& csv) {
  std::vector<HostValue> out;
  std::stringstream ss(csv);
  std::string item;
  auto as_int = [](std::string_view s) -> std::optional<std::int64_t> {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (auto dots = item.find(".."); dots != std::string::npos) {
      auto lo = as_int(std::string_view(item).substr(0, dots));
      auto hi = as_int(std::string_view(item).substr(dots + 2));
      if (lo && hi) {
        if (*hi < *lo || *hi - *lo > 1'000'000) throw UsageError("bad range " + item);
        for (std::int64_t i = *lo; i <= *hi; ++i) out.emplace_back(i);
        continue;
      }
    }
    if (auto i = as_int(item)) {
      out.emplace_back(*i);
      continue;
    }
    double d = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
    if (!item.empty() && ec == std::errc{} && p == item.data() + item.size()) {
      out.emplace_back(d);
    } else if (item == "true" || item == "false") {
      out.emplace_back(item == "true");
    } else {
      out.emplace_back(item);
    }
  }
  if (out.empty()) throw UsageError("--values is empty");
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || p != item.data() + item.size() || v == 0) {
      throw UsageError("bad worker count '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--workers is empty");
  return out;
}

int cmd_eval(const std::string& file, const Target& target) {
  Expr e = parse_expr(read_source(file));
  RExecutor x = target.connect();
  Outcome o = x.eval(e);
  if (std::holds_alternative<Value>(o)) {
    std::cout << describe(o) << "\n";
  } else {
    std::cerr << describe(o) << "\n";
  }
  return exit_code(o);
}

int cmd_sweep(const std::string& file, const std::string& param, const std::string& values, const Target& target) {
  Expr templ = parse_expr(read_source(file));
  auto job = [&] {
    try {
      return make_sweep(templ, param, parse_values(values));
    } catch (const SweepError& e) {
      throw UsageError(e.what());
    }
  }();
  if (target.fuel) job.fuel = target.fuel;
  RExecutor x = target.connect();
  auto results = run_sweep(job, x);
  int rc = t::ok;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << i << ' ' << describe(results[i]) << "\n";
    rc = std::max(rc, exit_code(results[i]));
  }
  return rc;
}

int cmd_mandel(MandelSpec spec, const std::string& center, const std::string& out, const Target& target) {
  auto comma = center.find(',');
  if (comma == std::string::npos) throw UsageError("--center takes CX,CY");
  try {
    spec.cx = std::stod(center.substr(0, comma));
    spec.cy = std::stod(center.substr(comma + 1));
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad Mandelbrot parameters: ") + e.what());
  }
  RExecutor x = target.connect();
  render_mandel(spec, x, out);
  int tasks = (spec.height + spec.rows_per_task - 1) / spec.rows_per_task;
  std::cerr << "wrote " << out << ": " << spec.width << "x" << spec.height << ", " << tasks << " tasks\n";
  return t::ok;
}

int cmd_bench(std::size_t items, std::int64_t spin, const std::string& workers, const std::string& csv, int runs,
              std::string worker_bin) {
  if (items == 0 || spin < 0) throw UsageError("--items must be positive and --spin non-negative");
  auto counts = parse_counts(workers);
  if (worker_bin.empty()) worker_bin = proc::self_dir() + "/qx-worker";
  std::vector<proc::Child> children;
  auto connect = [&](std::size_t w) {
    children.clear();
    std::vector<net::Endpoint> pool;
    for (std::size_t i = 0; i < w; ++i) {
      auto [child, ep] = proc::spawn_server(worker_bin, {"--listen", "127.0.0.1:0", "--concurrency", "1"});
      children.push_back(std::move(child));
      pool.push_back(ep);
    }
    return RExecutor::embedded(std::move(pool));
  };
  std::cerr << "bench: " << items << " items, spin " << spin << ", " << std::thread::hardware_concurrency()
            << " hardware threads, median of " << runs << " runs\n";
  auto rows = benchmark_sweep(items, spin, counts, connect, runs);
  children.clear();
  std::string text = bench_csv(rows);
  std::cout << text << std::flush;
  if (!csv.empty()) write_output(csv, text);
  return t::ok;
}

int cmd_jsgen(const std::string& file, const std::string& name, const std::string& rpc, const std::string& out) {
  Expr e = parse_expr(read_source(file));
  std::vector<std::pair<Ident, int>> stubs;
  try {
    stubs = js::parse_rpc_list(rpc);
  } catch (const js::JsError& err) {
    throw UsageError(err.what());
  }
  if (!is_valid_ident(name)) throw UsageError("invalid --name " + name);
  write_output(out, js::build_module(name, e, stubs).emit());
  return t::ok;
}

int cmd_form_demo(const std::string& out, const std::vector<std::string>& submit) {
  write_output(out, forms::demo_page());
  if (submit.empty()) return t::ok;
  forms::Inputs in;
  for (const auto& kv : submit) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--submit takes NAME=VALUE");
    in[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  auto r = forms::run_formlet(forms::max_number_formlet(), in);
  if (r.ok()) {
    std::cerr << "ok " << r.value() << "\n";
    return t::ok;
  }
  for (const auto& e : r.errors()) std::cerr << "invalid " << e.field << ": " << e.message << "\n";
  return t::eval_error;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Quotation toolkit: evaluate, sweep, render, benchmark, translate."};
  app.require_subcommand(1);

  Target target;
  std::string file;

  auto* eval = app.add_subcommand("eval", "Evaluate one quotation and print its value");
  eval->add_option("file", file, "Source file, or - for stdin")->required();
  target.add_to(eval);

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a template once per parameter value");
  sweep->add_option("file", file, "Template source, or - for stdin")->required();
  sweep->add_option("--param", param, "Name of the template's hole")->required();
  sweep->add_option("--values", values, "Comma-separated values; lo..hi expands to integers")->required();
  target.add_to(sweep);

  MandelSpec spec;
  std::string center = "-0.5,0";
  std::string out;
  auto* mandel = app.add_subcommand("mandel", "Render the Mandelbrot set to a grayscale PPM");
  mandel->add_option("--width", spec.width)->capture_default_str();
  mandel->add_option("--height", spec.height)->capture_default_str();
  mandel->add_option("--center", center, "CX,CY")->capture_default_str();
  mandel->add_option("--vieww", spec.view_w, "Width of the view in the complex plane")->capture_default_str();
  mandel->add_option("--max-iter", spec.max_iter)->capture_default_str();
  mandel->add_option("--rows-per-task", spec.rows_per_task)->capture_default_str();
  mandel->add_option("--out", out, "Output file")->required();
  target.add_to(mandel);

  std::size_t items = 64;
  std::int64_t spin = 200000;
  std::string counts = "1,2,4";
  std::string csv;
  int runs = 3;
  std::string worker_bin;
  auto* bench = app.add_subcommand("bench", "Time a sweep of countdown tasks over 1..n spawned workers");
  bench->add_option("--items", items)->capture_default_str();
  bench->add_option("--spin", spin, "Countdown length per item")->capture_default_str();
  bench->add_option("--workers", counts, "Worker counts to compare")->capture_default_str();
  bench->add_option("--csv", csv, "Also write the table here");
  bench->add_option("--runs", runs, "Runs per worker count; the median is kept")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--worker-bin", worker_bin, "qx-worker executable (default: next to qx)");

  std::string name = "main";
  std::string rpc;
  auto* jsgen = app.add_subcommand("jsgen", "Translate a quotation to JavaScript");
  jsgen->add_option("file", file, "Source file, or - for stdin")->required();
  jsgen->add_option("--name", name, "Name of the definition")->capture_default_str();
  jsgen->add_option("--rpc", rpc, "Server functions as name:arity,...");
  jsgen->add_option("--out", out, "Output file, or - for stdout")->required();

  std::vector<std::string> submit;
  auto* form = app.add_subcommand("form", "Formlet pages");
  form->require_subcommand(1);
  auto* demo = form->add_subcommand("demo", "Write the demo page");
  demo->add_option("--out", out, "Output file, or - for stdout")->required();
  demo->add_option("--submit", submit, "Simulated field value NAME=VALUE; prints the formlet's result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : t::usage;
  }

  try {
    if (*eval) return cmd_eval(file, target);
    if (*sweep) return cmd_sweep(file, param, values, target);
    if (*mandel) return cmd_mandel(spec, center, out, target);
    if (*bench) return cmd_bench(items, spin, counts, csv, runs, worker_bin);
    if (*jsgen) return cmd_jsgen(file, name, rpc, out);
    if (*demo) return cmd_form_demo(out, submit);
  } catch (const UsageError& e) {
    std::cerr << "qx: " << e.what() << "\n";
    return t::usage;
  } catch (const ParseError& e) {
    std::cerr << "qx: parse error at offset " << e.offset() << ": " << e.message() << "\n";
    return t::eval_error;
  } catch (const js::JsError& e) {
    std::cerr << "qx: " << e.what() << "\n";
    return t::eval_error;
  } catch (const SweepAborted& e) {
    std::cerr << "qx: " << e.what() << "\n";
    return t::transport;
  } catch (const std::exception& e) {
    std::cerr << "qx: " << e.what() << "\n";
    return t::transport;
  }
  return t::usage;
}
