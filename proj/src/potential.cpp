#include "logsac/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace logsac {

namespace {

// x ln x with the continuous extension at 0.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_unregularized_domain(double xi) {
  if (!(std::abs(xi) <= 1.0)) {
    throw std::domain_error("logarithmic potential evaluated outside [-1, 1]: xi = " +
                            std::to_string(xi));
  }
}

// Shared quintic bridge: -3/k^4 s^5 - 8/k^3 s^4 - 6/k^2 s^3, with s in [-k, 0).
double quintic_bridge(double s, double kappa) {
  const double r = s / kappa;
  return -kappa * r * r * r * (3.0 * r * r + 8.0 * r + 6.0);
}

double tail_functional(double s, const BoundFunctionalParams& b) {
  b.validate();
  if (s >= 0.0) return 0.0;
  if (s < -b.kappa) return -s;
  return quintic_bridge(s, b.kappa);
}

}  // namespace

void PotentialParams::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("potential: delta must be a finite value >= 0");
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("potential: c must be a finite value >= 0");
  }
}

void BoundFunctionalParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("bound functional: kappa must be > 0");
  }
}

double flog(double xi, double c) {
  require_unregularized_domain(xi);
  return xlogx(1.0 + xi) + xlogx(1.0 - xi) - c * xi * xi;
}

double flog_delta(double xi, const PotentialParams& p) {
  if (p.delta == 0.0) return flog(xi, p.c);
  // The two "-xi" terms of the defining formula cancel; they are omitted.
  const double sd = std::sqrt(p.delta);
  const double a = xi + 1.0;
  const double b = xi - 1.0;
  const double upper = 0.5 * a * std::log(a * a + p.delta) + sd * std::atan(a / sd);
  const double lower = 0.5 * b * std::log(b * b + p.delta) + sd * std::atan(b / sd);
  return upper - lower - p.c * xi * xi;
}

double flog1_prime(double xi, const PotentialParams& p) {
  if (p.delta == 0.0) {
    require_unregularized_domain(xi);
    return std::log1p(xi) - std::log1p(-xi);
  }
  const double a = xi + 1.0;
  const double b = xi - 1.0;
  return 0.5 * std::log((a * a + p.delta) / (b * b + p.delta));
}

double flog_delta_prime(double xi, const PotentialParams& p) {
  return flog1_prime(xi, p) - 2.0 * p.c * xi;
}

double flog1_second(double xi, const PotentialParams& p) {
  if (!(p.delta > 0.0)) {
    throw std::domain_error("second derivative of the potential requires delta > 0");
  }
  const double a = 1.0 + xi;
  const double b = 1.0 - xi;
  return (2.0 * (1.0 - xi * xi) + 2.0 * p.delta) / ((a * a + p.delta) * (b * b + p.delta));
}

double flog_delta_second(double xi, const PotentialParams& p) {
  return flog1_second(xi, p) - 2.0 * p.c;
}

double flog1_prime_bound(double delta) {
  if (!(delta > 0.0)) throw std::domain_error("flog1_prime_bound requires delta > 0");
  return 0.5 * std::log((4.0 + delta) / delta);
}

double f1_kappa(double xi, const BoundFunctionalParams& b) { return tail_functional(1.0 - xi, b); }

double f2_kappa(double xi, const BoundFunctionalParams& b) { return tail_functional(xi + 1.0, b); }

}  // namespace logsac
