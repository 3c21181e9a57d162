#include "logsac/energy_law.hpp"

#include <cmath>
#include <stdexcept>

#include "logsac/diagnostics.hpp"

namespace logsac {

EnergyLawEvaluator::EnergyLawEvaluator(BasisPtr basis, const SolverConfig& cfg)
    : basis_(std::move(basis)), cfg_(cfg), weights_(mode_weights(*basis_)) {
  const int n = basis_->modes();
  const int m = basis_->grid_points();
  if (m != n) return;

  const auto x = basis_->coordinates();
  const double h = basis_->cell_width();
  const std::size_t mm = static_cast<std::size_t>(m);

  // phi[p][i] = phi_p(x_i)
  std::vector<std::vector<std::complex<double>>> phi(static_cast<std::size_t>(n),
                                                     std::vector<std::complex<double>>(mm));
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < m; ++i) phi[p][i] = basis_->basis_1d(p, x[i]);
  }

  // D(i, i') = h^2 sum_k lambda_k conj(phi_k(x_i)) phi_k(x_i')
  std::vector<std::complex<double>> d(mm * mm);
  for (int k = 0; k < n; ++k) {
    const double lk = basis_->eigenvalue_1d(k);
    if (lk == 0.0) continue;
    for (std::size_t i = 0; i < mm; ++i) {
      for (std::size_t ip = 0; ip < mm; ++ip) d[i * mm + ip] += lk * std::conj(phi[k][i]) * phi[k][ip];
    }
  }
  for (auto& v : d) v *= h * h;

  kernel_.assign(static_cast<std::size_t>(n), std::vector<double>(mm * mm));
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < mm; ++i) {
      for (std::size_t ip = 0; ip < mm; ++ip) {
        kernel_[j][i * mm + ip] = (phi[j][i] * d[i * mm + ip] * std::conj(phi[j][ip])).real();
      }
    }
  }

  row_weight_.assign(static_cast<std::size_t>(n) * mm, 0.0);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int j2 = 0; j2 < n; ++j2) {
      const double q = weights_[static_cast<std::size_t>(j1) * n + j2];
      if (q == 0.0) continue;
      for (std::size_t y = 0; y < mm; ++y) row_weight_[j1 * mm + y] += h * q * std::norm(phi[j2][y]);
    }
  }

  point_weight_.assign(mm * mm, 0.0);
  for (int j1 = 0; j1 < n; ++j1) {
    for (std::size_t xi = 0; xi < mm; ++xi) {
      const double a = std::norm(phi[j1][xi]);
      for (std::size_t y = 0; y < mm; ++y) point_weight_[xi * mm + y] += a * row_weight_[j1 * mm + y] / h;
    }
  }
}

EnergyLawTerms EnergyLawEvaluator::base_terms(const Field& u) const {
  EnergyLawTerms t;
  t.energy = energy(u, cfg_.potential, cfg_.sigma);

  // sigma A u - F'(u) on the grid
  Spectrum lap = apply_laplacian(u.spectrum(), *basis_);
  lap *= cfg_.sigma;
  std::vector<double> g(basis_->grid_size());
  basis_->to_grid(lap, g);
  const auto values = u.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g[i] - flog_delta_prime(values[i], cfg_.potential);
    sum += r * r;
  }
  t.dissipation = sum * basis_->cell_area();
  return t;
}

double EnergyLawEvaluator::energy_rate(const EnergyLawTerms& t) const {
  const double eps = cfg_.noise.epsilon;
  return -t.dissipation + 0.5 * eps * eps * (cfg_.sigma * t.ito_gradient + t.ito_trace);
}

EnergyLawTerms EnergyLawEvaluator::evaluate(const Field& u) const {
  if (kernel_.empty()) return evaluate_direct(u);
  EnergyLawTerms t = base_terms(u);
  if (cfg_.noise.epsilon == 0.0) return t;

  const std::size_t m = static_cast<std::size_t>(basis_->grid_points());
  const std::size_t n = static_cast<std::size_t>(basis_->modes());
  const auto values = u.values();
  std::vector<double> b(m * m);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = cfg_.noise.b(values[i]);

  // b^T K_j b along x for every row y, and along y for every column x.
  std::vector<double> line(m);
  std::vector<double> kb(m);
  double grad = 0.0;
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t fixed = 0; fixed < m; ++fixed) {
      for (std::size_t i = 0; i < m; ++i) line[i] = dir == 0 ? b[i * m + fixed] : b[fixed * m + i];
      for (std::size_t j = 0; j < n; ++j) {
        const double w = row_weight_[j * m + fixed];
        if (w == 0.0) continue;
        const auto& k = kernel_[j];
        double quad = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (line[i] == 0.0) continue;
          const double* row = &k[i * m];
          double acc = 0.0;
          for (std::size_t ip = 0; ip < m; ++ip) acc += row[ip] * line[ip];
          quad += line[i] * acc;
        }
        grad += w * quad;
      }
    }
  }
  t.ito_gradient = grad;

  double trace = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    trace += flog_delta_second(values[i], cfg_.potential) * b[i] * b[i] * point_weight_[i];
  }
  t.ito_trace = trace * basis_->cell_area();
  return t;
}

EnergyLawTerms EnergyLawEvaluator::evaluate_direct(const Field& u) const {
  EnergyLawTerms t = base_terms(u);
  if (cfg_.noise.epsilon == 0.0) return t;

  const int n = basis_->modes();
  const std::size_t size = basis_->grid_size();
  const std::size_t m = static_cast<std::size_t>(basis_->grid_points());
  const auto x = basis_->coordinates();
  const auto values = u.values();

  std::vector<double> b(size), second(size);
  for (std::size_t i = 0; i < size; ++i) {
    b[i] = cfg_.noise.b(values[i]);
    second[i] = flog_delta_second(values[i], cfg_.potential);
  }

  std::vector<double> re(size), im(size), gre(size), gim(size);
  Spectrum sre(n), sim(n), combined(n);
  double grad = 0.0;
  double trace = 0.0;
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double w = weights_[static_cast<std::size_t>(p) * n + q];
      if (w == 0.0) continue;
      for (std::size_t ix = 0; ix < m; ++ix) {
        for (std::size_t iy = 0; iy < m; ++iy) {
          const auto e = basis_->basis_function(p, q, x[ix], x[iy]);
          const std::size_t idx = ix * m + iy;
          re[idx] = b[idx] * e.real();
          im[idx] = b[idx] * e.imag();
        }
      }
      basis_->to_spectrum(re, sre);
      basis_->to_spectrum(im, sim);
      for (std::size_t i = 0; i < combined.size(); ++i) {
        combined.coeffs[i] = sre.coeffs[i] + std::complex<double>(0.0, 1.0) * sim.coeffs[i];
      }
      grad += w * grad_norm_sq(combined, *basis_);

      basis_->to_grid(sre, gre);
      basis_->to_grid(sim, gim);
      double local = 0.0;
      for (std::size_t i = 0; i < size; ++i) local += second[i] * (gre[i] * gre[i] + gim[i] * gim[i]);
      trace += w * local * basis_->cell_area();
    }
  }
  t.ito_gradient = grad;
  t.ito_trace = trace;
  return t;
}

// ---------------------------------------------------------------------------

EnergyLawAccumulator::EnergyLawAccumulator(const EnergyLawEvaluator& evaluator, double tau)
    : evaluator_(&evaluator), tau_(tau) {}

double EnergyLawAccumulator::add(const Field& u) {
  const EnergyLawTerms t = evaluator_->evaluate(u);
  if (!started_) {
    started_ = true;
    h0_ = t.energy;
  }
  const double residual = t.energy - h0_ - integral_;
  integral_ += tau_ * evaluator_->energy_rate(t);
  return residual;
}

EnergyLawSeries summarize_residuals(const std::vector<double>& times,
                                    const std::vector<std::vector<double>>& per_realization) {
  EnergyLawSeries s;
  s.times = times;
  const std::size_t count = per_realization.size();
  if (count == 0) throw std::invalid_argument("energy law: empty ensemble");
  s.residual.assign(times.size(), 0.0);
  s.stderr_.assign(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double mean = 0.0;
    for (const auto& r : per_realization) mean += r.at(k);
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& r : per_realization) var += (r[k] - mean) * (r[k] - mean);
    var = count > 1 ? var / static_cast<double>(count - 1) : 0.0;
    s.residual[k] = mean;
    s.stderr_[k] = std::sqrt(var / static_cast<double>(count));
  }
  return s;
}

EnergyLawSeries energy_law_residual(std::span<const TrajectoryRecord> ensemble, const SolverConfig& cfg) {
  if (ensemble.empty()) throw std::invalid_argument("energy law: empty ensemble");
  const TrajectoryRecord& first = ensemble.front();
  if (first.fields.empty() || first.fields.size() != first.times.size()) {
    throw std::invalid_argument("energy law: trajectories were recorded without fields");
  }
  EnergyLawEvaluator evaluator(first.fields.front().basis_ptr(), cfg);

  std::vector<std::vector<double>> per_realization;
  per_realization.reserve(ensemble.size());
  for (const auto& rec : ensemble) {
    if (rec.fields.size() != first.fields.size()) {
      throw std::invalid_argument("energy law: realizations recorded different numbers of fields");
    }
    if (rec.times.size() > 1 && std::abs(rec.times[1] - rec.times[0] - cfg.tau) > 1e-9 * cfg.tau) {
      throw std::invalid_argument("energy law: fields must be recorded at every step");
    }
    EnergyLawAccumulator acc(evaluator, cfg.tau);
    std::vector<double> r;
    r.reserve(rec.fields.size());
    for (const auto& f : rec.fields) r.push_back(acc.add(f));
    per_realization.push_back(std::move(r));
  }
  return summarize_residuals(first.times, per_realization);
}

}  // namespace logsac
