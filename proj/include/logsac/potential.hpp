#pragma once

// Flory-Huggins logarithmic potential, its energy-regularized family and the
// C^2 bound functionals used to measure excursions outside [-1, 1].
//
// All functions are pure and may be called concurrently.

namespace logsac {

/// Parameters of the regularized potential F^delta.
/// `delta` is the regularization scale (delta = 0 selects the unregularized
/// potential, defined only on [-1, 1]); `c` is the double-well depth.
struct PotentialParams {
  double delta = 0.0;
  double c = 1.5;

  /// Throws std::invalid_argument if delta < 0 or c < 0.
  void validate() const;
};

/// Smoothing width of the bound functionals f^1_kappa, f^2_kappa.
struct BoundFunctionalParams {
  double kappa = 0.1;

  void validate() const;
};

/// F(xi) = (1+xi)ln(1+xi) + (1-xi)ln(1-xi) - c xi^2 on [-1, 1], with the
/// continuous extension 0 ln 0 = 0 at the endpoints.
/// Throws std::domain_error for |xi| > 1.
double flog(double xi, double c);

/// Regularized potential F^delta. For delta = 0 this reduces to flog() and the
/// same domain restriction applies.
double flog_delta(double xi, const PotentialParams& p);

/// (F^delta)'(xi) = 1/2 ln((xi+1)^2 + delta) - 1/2 ln((xi-1)^2 + delta) - 2c xi.
double flog_delta_prime(double xi, const PotentialParams& p);

/// (F^delta)''(xi). Requires delta > 0 (throws std::domain_error otherwise).
double flog_delta_second(double xi, const PotentialParams& p);

/// Derivative of the explicit part F^delta_1 = F^delta + c xi^2, i.e. the pure
/// logarithmic part of the drift. Globally bounded by 1/2 ln((4+delta)/delta).
double flog1_prime(double xi, const PotentialParams& p);

/// Second derivative of F^delta_1 (always positive for delta > 0).
double flog1_second(double xi, const PotentialParams& p);

/// Global bound of |flog1_prime| for a given delta > 0.
double flog1_prime_bound(double delta);

/// Upper tail functional: xi - 1 beyond 1 + kappa, zero on (-inf, 1], quintic
/// C^2 bridge in between.
double f1_kappa(double xi, const BoundFunctionalParams& b);

/// Lower tail functional, the mirror image of f1_kappa at -1.
double f2_kappa(double xi, const BoundFunctionalParams& b);

}  // namespace logsac
