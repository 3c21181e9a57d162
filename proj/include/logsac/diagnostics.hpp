#pragma once

// Scalar observables: modified energy, tail norms of the excursions beyond
// [-1, 1], the measure of the bound-violation set and ensemble statistics.
//
// Grid quadrature is the uniform tensor rule of the basis grid (rectangle rule
// on the periodic grid, midpoint rule on the Neumann cell centres); it is
// exact for the retained modes, so energies agree with the spectral norms.

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "logsac/potential.hpp"
#include "logsac/spectral.hpp"

namespace logsac {

struct TrajectoryRecord;

struct DiagnosticsRow {
  double time = 0.0;
  double energy = 0.0;
  double sup_norm = 0.0;
  double tail_upper = 0.0;  // ||(1 - u)^-||_{L^2}
  double tail_lower = 0.0;  // ||(u + 1)^-||_{L^2}
  double violation_measure = 0.0;
  bool blown_up = false;
};

/// H(u) = sigma/2 ||grad u||^2 + int F^delta(u). With delta = 0 a field leaving
/// [-1, 1] throws std::domain_error.
double energy(const Field& u, const PotentialParams& p, double sigma);

/// Grid quadrature of F^delta(u) alone.
double potential_energy(const Field& u, const PotentialParams& p);

/// (||(1 - u)^-||, ||(u + 1)^-||) by grid quadrature.
std::pair<double, double> tail_norms(const Field& u);

/// Grid-cell measure of {|u| > 1 + delta0}.
double violation_measure(const Field& u, double delta0);

DiagnosticsRow compute_diagnostics(const Field& u, const PotentialParams& p, double sigma, double delta0,
                                   double time);

struct ProportionEstimate {
  double estimate = 0.0;
  double lower = 0.0;  // Wilson 95% interval
  double upper = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
};

/// Wilson score interval for hits / trials at z = 1.959964.
ProportionEstimate wilson_interval(std::size_t hits, std::size_t trials);

/// Fraction of realizations whose sup over time of |u| exceeds 1 + delta0
/// (blown-up realizations count as exceeding). Needs at least two records.
ProportionEstimate bound_violation_probability(std::span<const TrajectoryRecord> records, double delta0);

/// Same estimate from per-realization maxima of the sup norm.
ProportionEstimate bound_violation_probability(std::span<const double> max_sup_norms, double delta0);

/// time,energy,sup_norm,tail_upper,tail_lower,violation_measure,blown_up
void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows);

}  // namespace logsac
