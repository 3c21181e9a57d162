#include "logsac/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace logsac {

unsigned default_thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (count == 0) return;
  if (threads == 0) threads = default_thread_count();
  const std::size_t workers = std::min<std::size_t>(threads, count);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

SolverConfig realization_config(const SolverConfig& cfg, std::size_t m) {
  SolverConfig out = cfg;
  out.seed = realization_seed(cfg.seed, m);
  return out;
}

std::vector<TrajectoryRecord> run_ensemble(const Field& u0, const SolverConfig& cfg, std::size_t realizations,
                                           const TrajectoryOptions& options, unsigned threads) {
  cfg.validate(u0.basis());
  // Synchronize both representations so concurrent copies never mutate u0.
  u0.values();
  u0.spectrum();
  return parallel_map<TrajectoryRecord>(
      realizations, [&](std::size_t m) { return run_trajectory(u0, realization_config(cfg, m), options); },
      threads);
}

}  // namespace logsac
