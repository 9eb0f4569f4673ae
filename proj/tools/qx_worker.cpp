#include <CLI11.hpp>

#include <iostream>

#include "common.hpp"
#include "qx/cluster.hpp"

int main(int argc, char** argv) {
  using namespace qx;
  CLI::App app{"Evaluates quotations sent over the wire protocol."};
  std::string listen = "127.0.0.1:0";
  std::uint64_t fuel = kDefaultFuel;
  std::size_t concurrency = 4;
  std::size_t max_queue = 128;
  app.add_option("--listen", listen, "HOST:PORT to bind (port 0 picks one)")->capture_default_str();
  app.add_option("--fuel", fuel, "Default step budget per request")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--concurrency", concurrency, "Evaluation threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-queue", max_queue, "Queued requests before shedding load")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : tools::usage;
  }

  WorkerConfig cfg;
  try {
    cfg.listen = net::Endpoint::parse(listen);
  } catch (const std::exception& e) {
    std::cerr << "qx-worker: " << e.what() << "\n";
    return tools::usage;
  }
  cfg.fuel = fuel;
  cfg.concurrency = concurrency;
  cfg.max_queue = max_queue;

  auto signals = tools::block_shutdown_signals();
  WorkerServer server(cfg);
  try {
    tools::announce(server.start().to_string());
  } catch (const std::exception& e) {
    std::cerr << "qx-worker: " << e.what() << "\n";
    return tools::transport;
  }
  tools::wait_for_shutdown(signals);
  server.stop();
  return tools::ok;
}
