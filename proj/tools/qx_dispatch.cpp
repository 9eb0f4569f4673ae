#include <CLI11.hpp>

#include <iostream>

#include "common.hpp"
#include "qx/cluster.hpp"

int main(int argc, char** argv) {
  using namespace qx;
  CLI::App app{"Routes quotations from clients to a pool of workers."};
  std::string listen = "127.0.0.1:0";
  std::string workers;
  std::size_t retries = 2;
  double timeout_s = 30;
  app.add_option("--listen", listen, "HOST:PORT to bind (port 0 picks one)")->capture_default_str();
  app.add_option("--workers", workers, "Comma-separated worker addresses (default: $QX_WORKERS)");
  app.add_option("--retries", retries, "Extra attempts after a transport failure")->capture_default_str();
  app.add_option("--timeout", timeout_s, "Seconds to wait for one worker reply")->capture_default_str()
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : tools::usage;
  }
  if (workers.empty()) workers = tools::env("QX_WORKERS").value_or("");

  net::Endpoint at;
  std::vector<net::Endpoint> pool;
  try {
    at = net::Endpoint::parse(listen);
    pool = net::parse_endpoints(workers);
  } catch (const std::exception& e) {
    std::cerr << "qx-dispatch: " << e.what() << "\n";
    return tools::usage;
  }
  if (pool.empty()) {
    std::cerr << "qx-dispatch: no workers given (--workers or QX_WORKERS)\n";
    return tools::usage;
  }

  DispatcherOptions opts;
  opts.retry_limit = retries;
  opts.request_timeout = net::Millis(static_cast<long long>(timeout_s * 1000));

  auto signals = tools::block_shutdown_signals();
  DispatcherServer server(at, pool, opts);
  try {
    tools::announce(server.start().to_string());
  } catch (const std::exception& e) {
    std::cerr << "qx-dispatch: " << e.what() << "\n";
    return tools::transport;
  }
  tools::wait_for_shutdown(signals);
  server.stop();
  return tools::ok;
}
