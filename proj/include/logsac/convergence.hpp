#pragma once

// Strong-error estimation with coupled noise. Every step size of a ladder is
// driven by the same fine Brownian path: the reference run uses the fine
// increments directly and a coarse run uses their sums.

#include <vector>

#include "logsac/solver.hpp"

namespace logsac {

struct StrongError {
  double tau = 0.0;
  double error = 0.0;   // sqrt(MC mean of ||u_tau(T) - u_ref(T)||^2)
  double stderr_ = 0.0; // jackknife standard error of `error`
  std::size_t blown_up = 0;  // realizations where either run blew up
};

/// Squared L2 errors at T of each ladder entry against the reference, one
/// row per realization (inf when a run blew up). Every tau must be an integer
/// multiple of tau_ref.
std::vector<std::vector<double>> coupled_squared_errors(const Field& u0, const SolverConfig& cfg,
                                                        const std::vector<double>& tau_ladder, double tau_ref,
                                                        std::size_t realizations, unsigned threads = 0);

/// Root-mean-square error with jackknife standard error.
StrongError summarize_strong_error(double tau, const std::vector<double>& squared_errors);

std::vector<StrongError> strong_errors(const Field& u0, const SolverConfig& cfg,
                                       const std::vector<double>& tau_ladder, double tau_ref,
                                       std::size_t realizations, unsigned threads = 0);

StrongError strong_error(const Field& u0, const SolverConfig& cfg, double tau_coarse, double tau_ref,
                         std::size_t realizations, unsigned threads = 0);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> taus;
  std::vector<double> errors;
  std::vector<double> stderrs;
};

/// Least-squares fit of ln(error) against ln(tau). Needs at least three
/// entries with positive finite errors; throws std::invalid_argument otherwise.
OrderFit estimate_order(const std::vector<StrongError>& errors);
OrderFit estimate_order(const std::vector<double>& taus, const std::vector<double>& errors);

}  // namespace logsac
