#pragma once

// Experiment configuration and its flat JSON form. Every SolverConfig field is
// a top-level key; unknown keys are rejected so typos surface as errors.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "logsac/solver.hpp"
#include "logsac/spectral.hpp"

namespace logsac {

enum class ExperimentKind { Simulate, Converge, EnergyScan, Coarsen, BlowupDemo, EnergyLaw };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& name);

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Simulate;
  Boundary boundary = Boundary::Neumann;
  bool dealias = false;
  SolverConfig solver;
  std::size_t realizations = 100;
  std::vector<double> tau_ladder;      // converge; energy-law (tau and tau/2)
  double tau_ref = 0.0;                // converge
  std::vector<double> delta_ladder;    // energy-scan
  std::vector<double> epsilon_ladder;  // coarsen
  std::string initial_condition = "fig1";
  std::string output_dir = "out";
  std::vector<double> snapshot_times;
  std::size_t record_every = 1;
  double delta0 = -1.0;  // negative selects delta
  double case2_slack = 0.05;  // blowup-demo: sup-norm slack of the bounded companion
  unsigned threads = 0;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
  BasisPtr make_basis() const;
};

/// Numerical failure other than a signaled blow-up (CLI exit code 3).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Library version, "0.1.0-" followed by git describe output when available.
const char* version();

/// Desk-scale defaults of each experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Starts from default_config of the "experiment" key (simulate if absent) and
/// overrides the keys present. Throws ConfigError.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json_text(const ExperimentConfig& cfg, int indent = 2);

}  // namespace logsac
