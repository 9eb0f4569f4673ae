#include "qx/cluster.hpp"

namespace qx {

PoolState::PoolState(std::vector<net::Endpoint> workers) {
  workers_.reserve(workers.size());
  for (auto& ep : workers) workers_.push_back(Worker{std::move(ep)});
}

std::size_t PoolState::healthy_count() const {
  std::size_t n = 0;
  for (const auto& w : workers_) n += w.healthy ? 1 : 0;
  return n;
}

std::size_t PoolState::schedule() {
  const std::size_t n = workers_.size();
  for (std::size_t step = 1; step <= n; ++step) {
    std::size_t i = (cursor_ + step) % n;
    if (workers_[i].healthy) {
      cursor_ = i;
      return i;
    }
  }
  throw NoHealthyWorkers();
}

}  // namespace qx
