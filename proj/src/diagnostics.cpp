#include "logsac/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "logsac/solver.hpp"

namespace logsac {

double potential_energy(const Field& u, const PotentialParams& p) {
  double sum = 0.0;
  for (double v : u.values()) sum += flog_delta(v, p);
  return sum * u.basis().cell_area();
}

double energy(const Field& u, const PotentialParams& p, double sigma) {
  return 0.5 * sigma * grad_norm_sq(u) + potential_energy(u, p);
}

std::pair<double, double> tail_norms(const Field& u) {
  double upper = 0.0;
  double lower = 0.0;
  for (double v : u.values()) {
    if (v > 1.0) upper += (v - 1.0) * (v - 1.0);
    if (v < -1.0) lower += (v + 1.0) * (v + 1.0);
  }
  const double w = u.basis().cell_area();
  return {std::sqrt(upper * w), std::sqrt(lower * w)};
}

double violation_measure(const Field& u, double delta0) {
  if (!(delta0 >= 0.0)) throw std::invalid_argument("violation measure: delta0 must be >= 0");
  std::size_t count = 0;
  for (double v : u.values()) {
    if (std::abs(v) > 1.0 + delta0) ++count;
  }
  return static_cast<double>(count) * u.basis().cell_area();
}

DiagnosticsRow compute_diagnostics(const Field& u, const PotentialParams& p, double sigma, double delta0,
                                   double time) {
  DiagnosticsRow row;
  row.time = time;
  row.energy = energy(u, p, sigma);
  row.sup_norm = sup_norm(u);
  std::tie(row.tail_upper, row.tail_lower) = tail_norms(u);
  row.violation_measure = violation_measure(u, delta0);
  row.blown_up = false;
  return row;
}

ProportionEstimate wilson_interval(std::size_t hits, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson interval of zero trials");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2n = z * z / n;
  const double centre = (p + 0.5 * z2n) / (1.0 + z2n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / (1.0 + z2n);
  const double lower = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double upper = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return {p, lower, upper, hits, trials};
}

ProportionEstimate bound_violation_probability(std::span<const double> max_sup_norms, double delta0) {
  if (max_sup_norms.size() < 2) throw std::invalid_argument("bound violation probability needs >= 2 realizations");
  std::size_t hits = 0;
  for (double s : max_sup_norms) {
    if (!(s <= 1.0 + delta0)) ++hits;
  }
  return wilson_interval(hits, max_sup_norms.size());
}

ProportionEstimate bound_violation_probability(std::span<const TrajectoryRecord> records, double delta0) {
  std::vector<double> maxima;
  maxima.reserve(records.size());
  for (const auto& r : records) {
    maxima.push_back(r.blown_up ? std::numeric_limits<double>::infinity() : r.max_sup_norm);
  }
  return bound_violation_probability(std::span<const double>(maxima), delta0);
}

void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows) {
  os << "time,energy,sup_norm,tail_upper,tail_lower,violation_measure,blown_up\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    os << r.time << ',' << r.energy << ',' << r.sup_norm << ',' << r.tail_upper << ',' << r.tail_lower << ','
       << r.violation_measure << ',' << (r.blown_up ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace logsac
