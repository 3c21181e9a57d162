#pragma once

// Monte Carlo ensembles. Realization m runs with seed realization_seed(base, m)
// on a worker pool; results are stored by index, so every aggregate is
// independent of scheduling.

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <vector>

#include "logsac/solver.hpp"

namespace logsac {

/// Worker count used when 0 is requested: hardware concurrency, at least 1.
unsigned default_thread_count();

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

/// parallel_for collecting fn(i) into slot i.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn, unsigned threads = 0) {
  std::vector<T> out(count);
  parallel_for(
      count, [&](std::size_t i) { out[i] = fn(i); }, threads);
  return out;
}

/// SolverConfig of realization m: cfg with seed = realization_seed(cfg.seed, m).
SolverConfig realization_config(const SolverConfig& cfg, std::size_t m);

/// M independent trajectories from the same initial field. Blow-ups are
/// flagged in the records and never abort the ensemble.
std::vector<TrajectoryRecord> run_ensemble(const Field& u0, const SolverConfig& cfg, std::size_t realizations,
                                           const TrajectoryOptions& options = {}, unsigned threads = 0);

}  // namespace logsac
