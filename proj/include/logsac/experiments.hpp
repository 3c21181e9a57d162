#pragma once

// The six experiment drivers. Each run_* function computes its result in
// memory; write_outputs stores CSV tables, snapshots and manifest.json under
// cfg.output_dir.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logsac/config.hpp"
#include "logsac/convergence.hpp"
#include "logsac/diagnostics.hpp"
#include "logsac/energy_law.hpp"
#include "logsac/solver.hpp"

namespace logsac {

/// Ensemble mean of the recorded diagnostics at each recorded time, over the
/// realizations still running at that time.
struct MeanDiagnosticsRow {
  double time = 0.0;
  std::size_t count = 0;  // realizations contributing
  double energy = 0.0;
  double energy_stderr = 0.0;
  double sup_norm = 0.0;
  double max_sup_norm = 0.0;
  double tail_upper = 0.0;
  double tail_lower = 0.0;
  double violation_measure = 0.0;
};

std::vector<MeanDiagnosticsRow> average_diagnostics(const std::vector<TrajectoryRecord>& records);

struct RealizationSummary {
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  bool blown_up = false;
  double blowup_time = 0.0;
  double max_sup_norm = 0.0;
};

std::vector<RealizationSummary> summarize_realizations(const std::vector<TrajectoryRecord>& records);

struct SimulateResult {
  std::vector<TrajectoryRecord> records;
  std::vector<MeanDiagnosticsRow> mean;
  std::vector<RealizationSummary> realizations;
  ProportionEstimate violation;  // needs >= 2 realizations, else trials = 0
};

struct ConvergeResult {
  std::vector<StrongError> errors;
  OrderFit fit;
  bool fit_valid = false;
};

struct EnergyScanResult {
  std::vector<double> deltas;
  std::vector<double> times;
  std::vector<std::vector<double>> mean_energy;    // [delta][time]
  std::vector<std::vector<double>> energy_stderr;  // [delta][time]
  std::vector<std::size_t> blown_up;               // per delta
  /// gaps[k] = max_t |mean_energy[k] - mean_energy[k + 1]|
  std::vector<double> gaps;
};

struct CoarsenResult {
  std::vector<double> epsilons;
  std::vector<double> times;
  std::vector<std::vector<double>> energy;  // [epsilon][time], mean over realizations
  std::vector<double> deterministic_energy; // ETDRK2
  std::vector<double> max_deviation;        // per epsilon, max_t |E_eps - E_det|
  std::vector<std::vector<Snapshot>> snapshots;  // realization 0 per epsilon
  std::vector<Snapshot> deterministic_snapshots;
  std::vector<bool> blown_up;
};

struct BlowupResult {
  std::vector<RealizationSummary> additive;   // B = identity
  std::vector<RealizationSummary> nemytskii;  // b = sin^2(pi u) companion
  std::size_t additive_blowups = 0;
  std::size_t nemytskii_blowups = 0;
  double nemytskii_max_sup = 0.0;
};

struct EnergyLawResult {
  std::vector<double> taus;            // coarse first, then tau / 2
  std::vector<EnergyLawSeries> series; // per tau, on the coarse time grid
  std::vector<double> rate_constant;   // C(t) = (R_tau - R_tau/2) / (tau / 2)
  std::vector<double> extrapolated;    // 2 R_tau/2 - R_tau
  std::size_t blown_up = 0;
};

SimulateResult run_simulate(const ExperimentConfig& cfg);
ConvergeResult run_converge(const ExperimentConfig& cfg);
EnergyScanResult run_energy_scan(const ExperimentConfig& cfg);
CoarsenResult run_coarsen(const ExperimentConfig& cfg);
BlowupResult run_blowup(const ExperimentConfig& cfg);
EnergyLawResult run_energy_law(const ExperimentConfig& cfg);

/// Per-realization energy-law residual series r(t_j), j = 0..J, at the
/// configured step, with the noise supplied by `path` (fine step dividing tau).
std::vector<double> energy_law_realization(const Field& u0, const SolverConfig& cfg, const NoisePath& path,
                                           const EnergyLawEvaluator& evaluator);

/// Runs the configured experiment, writes every output and returns the path
/// of manifest.json. Throws ConfigError or NumericalFailure.
std::filesystem::path run_experiment(const ExperimentConfig& cfg);

}  // namespace logsac
