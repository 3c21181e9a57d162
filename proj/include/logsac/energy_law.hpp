#pragma once

// Averaged energy evolution law for the truncated model:
//
//   E H(u(t)) = E H(u(0)) - int E ||sigma A u - F'(u)||^2
//             + eps^2/2 int E [ sigma sum_j q_j ||grad P^N(b(u) e_j)||^2
//                               + sum_j q_j <F''(u) P^N(b(u) e_j), P^N(b(u) e_j)> ].
//
// The trace sums run over the retained noise modes, which is exact for the
// simulated model. Time integrals use left-endpoint quadrature on the step grid.

#include <span>
#include <vector>

#include "logsac/solver.hpp"

namespace logsac {

struct EnergyLawTerms {
  double energy = 0.0;
  double dissipation = 0.0;    // ||sigma A u - F'(u)||^2
  double ito_gradient = 0.0;   // sum_j q_j ||grad P^N(b(u) e_j)||^2
  double ito_trace = 0.0;      // sum_j q_j <F''(u) P^N(b e_j), P^N(b e_j)>
};

class EnergyLawEvaluator {
 public:
  EnergyLawEvaluator(BasisPtr basis, const SolverConfig& cfg);

  /// Uses the separable kernel evaluation when M = N, the direct one otherwise.
  EnergyLawTerms evaluate(const Field& u) const;

  /// Transforms b(u) e_j for every retained noise mode. O(N^2) transforms.
  EnergyLawTerms evaluate_direct(const Field& u) const;

  /// Net drift of the energy per unit time,
  /// -dissipation + eps^2/2 (sigma ito_gradient + ito_trace).
  double energy_rate(const EnergyLawTerms& t) const;

 private:
  EnergyLawTerms base_terms(const Field& u) const;

  BasisPtr basis_;
  SolverConfig cfg_;
  std::vector<double> weights_;  // q per storage position
  // Separable kernels, only built when M = N:
  //   kernel_[j] (M x M): real part of h^2 sum_k lambda_k phi_j(x) conj(phi_k(x)) conj(phi_j(x')) phi_k(x')
  //   row_weight_[j * M + y] = h sum_j2 q_{j, j2} |phi_j2(y)|^2
  //   point_weight_[x * M + y] = sum_j q_j |e_j(x, y)|^2
  std::vector<std::vector<double>> kernel_;
  std::vector<double> row_weight_;
  std::vector<double> point_weight_;
};

/// Per-realization running residual
///   r(t_J) = H(u_J) - H(u_0) + tau sum_{j<J} rate-terms.
class EnergyLawAccumulator {
 public:
  EnergyLawAccumulator(const EnergyLawEvaluator& evaluator, double tau);

  /// Feed the state at step j (j = 0, 1, ... in order). Returns r(t_j).
  double add(const Field& u);

 private:
  const EnergyLawEvaluator* evaluator_;
  double tau_;
  bool started_ = false;
  double h0_ = 0.0;
  double integral_ = 0.0;  // tau sum of energy rates so far
};

struct EnergyLawSeries {
  std::vector<double> times;
  std::vector<double> residual;  // Monte Carlo mean of r(t)
  std::vector<double> stderr_;   // Monte Carlo standard error of r(t)
};

/// Residual series from trajectories recorded with full fields at every step
/// (TrajectoryOptions::record_fields with record_every = 1). Throws
/// std::invalid_argument when fields are missing.
EnergyLawSeries energy_law_residual(std::span<const TrajectoryRecord> ensemble, const SolverConfig& cfg);

/// Mean and standard error across realizations of per-realization series.
EnergyLawSeries summarize_residuals(const std::vector<double>& times,
                                    const std::vector<std::vector<double>>& per_realization);

}  // namespace logsac
