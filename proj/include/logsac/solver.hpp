#pragma once

// Time integration of du = (sigma A u - (F^delta)'(u)) dt + eps B(u) dW.
//
// StabilizedStepper is the stabilized semi-implicit Euler scheme: the linear
// part and the -c xi^2 well are implicit, the logarithmic part F^delta_1 and the
// noise are explicit, and alpha (u_{j+1} - u_j) tau damps the explicit part.
// Per mode,
//
//   u_{j+1} = [(1 + alpha tau) u_j - tau P^N F1'(u_j) + eps P^N B(u_j) dW_j]
//             / (1 + tau (sigma lambda - 2c + alpha)).
//
// Etdrk2Stepper is the deterministic stabilized exponential integrator used as
// the eps -> 0 comparator.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "logsac/diagnostics.hpp"
#include "logsac/noise.hpp"
#include "logsac/potential.hpp"
#include "logsac/spectral.hpp"

namespace logsac {

enum class Scheme { StabilizedSemiImplicit, DeterministicEtdrk2 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct SolverConfig {
  double sigma = 1.0;
  double tau = 1e-3;
  double T = 1.0;
  double alpha = 2.0;
  PotentialParams potential{1e-18, 1.5};
  NoiseSpec noise = NoiseSpec::nemytskii(0.0);
  int n_modes = 32;
  Scheme scheme = Scheme::StabilizedSemiImplicit;
  std::uint64_t seed = 1;
  double blowup_threshold = 1e3;

  /// J = T / tau; throws std::invalid_argument unless it is a positive integer
  /// within 1e-9 relative.
  std::size_t steps() const;

  /// Checks every invariant against the basis the run will use, including the
  /// solvability of the implicit step for each retained mode.
  void validate(const SpectralBasis& basis) const;
};

/// Thrown by steppers configured with invalid inputs (never for blow-up).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StabilizedStepper {
 public:
  StabilizedStepper(BasisPtr basis, const SolverConfig& cfg);

  /// Advances u by one step; dW may be null when eps = 0.
  void step(Field& u, const Spectrum* dW);

  double tau() const { return tau_; }

 private:
  BasisPtr basis_;
  SolverConfig cfg_;
  double tau_;
  std::vector<double> inv_denominator_;
  std::vector<double> work_;
  Spectrum nonlinear_;
  Spectrum noise_;
};

class Etdrk2Stepper {
 public:
  Etdrk2Stepper(BasisPtr basis, const SolverConfig& cfg);

  void step(Field& u);

  /// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, with a Taylor
  /// series for |z| < kSeriesThreshold.
  static double phi1(double z);
  static double phi2(double z);
  static constexpr double kSeriesThreshold = 1e-2;

 private:
  void nonlinear_term(const Field& u, Spectrum& out);

  BasisPtr basis_;
  SolverConfig cfg_;
  std::vector<double> exp_l_;
  std::vector<double> tau_phi1_;
  std::vector<double> tau_phi2_;
  std::vector<double> work_;
  Spectrum n_u_;
  Spectrum n_a_;
};

/// One stabilized step with the increment j of `path` (aggregated when
/// cfg.tau is a multiple of the path's fine step).
Field step_stabilized(const Field& u, std::size_t j, const SolverConfig& cfg, const NoisePath& path);

/// One deterministic ETDRK2 step; throws SolverError when eps != 0.
Field step_etdrk2(const Field& u, const SolverConfig& cfg);

struct Snapshot {
  double time = 0.0;
  Field field;
};

struct TrajectoryOptions {
  std::vector<double> snapshot_times;
  /// Diagnostics are recorded every `record_every` steps (and at T).
  std::size_t record_every = 1;
  /// Keep the full field at every recorded time.
  bool record_fields = false;
  /// Threshold for the violation-set measure; negative selects delta.
  double delta0 = -1.0;
  /// Called with (step index, state) at j = 0, ..., J before each step and at J.
  std::function<void(std::size_t, const Field&)> observer;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<Snapshot> snapshots;
  std::vector<Field> fields;
  Field final_state;
  bool blown_up = false;
  double blowup_time = 0.0;
  /// max over every step (not only recorded ones) of the sup norm.
  double max_sup_norm = 0.0;
  std::size_t steps_taken = 0;
};

/// Runs J = T / tau steps. Stops early and flags blow-up when the sup norm
/// exceeds cfg.blowup_threshold or the state becomes non-finite.
TrajectoryRecord run_trajectory(const Field& u0, const SolverConfig& cfg, const TrajectoryOptions& options = {});

/// As above, driven by an explicit noise path whose fine step divides cfg.tau.
TrajectoryRecord run_trajectory(const Field& u0, const SolverConfig& cfg, const NoisePath& path,
                                const TrajectoryOptions& options = {});

}  // namespace logsac
