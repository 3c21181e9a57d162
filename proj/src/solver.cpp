#include "logsac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace logsac {

std::string to_string(Scheme s) {
  return s == Scheme::StabilizedSemiImplicit ? "stabilized" : "etdrk2";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "stabilized" || name == "stabilized-semi-implicit") return Scheme::StabilizedSemiImplicit;
  if (name == "etdrk2") return Scheme::DeterministicEtdrk2;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected stabilized or etdrk2)");
}

std::size_t SolverConfig::steps() const {
  if (!(tau > 0.0) || !(T > 0.0)) throw std::invalid_argument("solver: tau and T must be > 0");
  const double r = T / tau;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("solver: T / tau must be a positive integer");
  }
  return static_cast<std::size_t>(rounded);
}

void SolverConfig::validate(const SpectralBasis& basis) const {
  if (!(sigma > 0.0)) throw std::invalid_argument("solver: sigma must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("solver: alpha must be >= 0");
  potential.validate();
  if (!(potential.delta > 0.0)) throw std::invalid_argument("solver: the regularized model needs delta > 0");
  noise.validate();
  if (n_modes != basis.modes()) throw std::invalid_argument("solver: n_modes does not match the basis");
  if (!(blowup_threshold > 0.0)) throw std::invalid_argument("solver: blow-up threshold must be > 0");
  steps();
  if (scheme == Scheme::DeterministicEtdrk2 && noise.epsilon != 0.0) {
    throw std::invalid_argument("solver: the ETDRK2 comparator is deterministic (epsilon must be 0)");
  }
  if (scheme == Scheme::StabilizedSemiImplicit) {
    for (int p = 0; p < basis.modes(); ++p) {
      for (int q = 0; q < basis.modes(); ++q) {
        const double d = 1.0 + tau * (sigma * basis.eigenvalue(p, q) - 2.0 * potential.c + alpha);
        if (!(d > 1e-12)) throw DegenerateDenominator(p, q, d);
      }
    }
  }
}

// ---------------------------------------------------------------------------

StabilizedStepper::StabilizedStepper(BasisPtr basis, const SolverConfig& cfg)
    : basis_(std::move(basis)), cfg_(cfg), tau_(cfg.tau), nonlinear_(basis_->modes()), noise_(basis_->modes()) {
  const double shift = cfg_.alpha - 2.0 * cfg_.potential.c;
  inv_denominator_.resize(basis_->mode_count());
  for (int p = 0; p < basis_->modes(); ++p) {
    for (int q = 0; q < basis_->modes(); ++q) {
      const double d = 1.0 + tau_ * (cfg_.sigma * basis_->eigenvalue(p, q) + shift);
      if (!(d > 1e-12)) throw DegenerateDenominator(p, q, d);
      inv_denominator_[static_cast<std::size_t>(p) * basis_->modes() + q] = 1.0 / d;
    }
  }
  work_.resize(basis_->grid_size());
}

void StabilizedStepper::step(Field& u, const Spectrum* dW) {
  if (!u.basis().same_as(*basis_)) throw SolverError("stepper: field basis does not match");
  const auto values = u.values();
  const PotentialParams& pot = cfg_.potential;
  for (std::size_t i = 0; i < work_.size(); ++i) work_[i] = flog1_prime(values[i], pot);
  basis_->to_spectrum(work_, nonlinear_);

  const bool noisy = cfg_.noise.epsilon != 0.0 && dW != nullptr;
  if (noisy) apply_diffusion(u, *dW, cfg_.noise, noise_);

  const double keep = 1.0 + cfg_.alpha * tau_;
  Spectrum& s = u.mutable_spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::complex<double> rhs = keep * s.coeffs[i] - tau_ * nonlinear_.coeffs[i];
    if (noisy) rhs += noise_.coeffs[i];
    s.coeffs[i] = rhs * inv_denominator_[i];
  }
  basis_->enforce_real(s);
}

// ---------------------------------------------------------------------------

double Etdrk2Stepper::phi1(double z) {
  if (std::abs(z) < kSeriesThreshold) {
    // sum z^k / (k+1)!, k = 0..7
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 7; ++k) {
      term *= z / (k + 1);
      sum += term;
    }
    return sum;
  }
  return std::expm1(z) / z;
}

double Etdrk2Stepper::phi2(double z) {
  if (std::abs(z) < kSeriesThreshold) {
    // sum z^k / (k+2)!, k = 0..7
    double term = 0.5, sum = 0.5;
    for (int k = 1; k <= 7; ++k) {
      term *= z / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

Etdrk2Stepper::Etdrk2Stepper(BasisPtr basis, const SolverConfig& cfg)
    : basis_(std::move(basis)), cfg_(cfg), n_u_(basis_->modes()), n_a_(basis_->modes()) {
  const double tau = cfg_.tau;
  const std::size_t count = basis_->mode_count();
  exp_l_.resize(count);
  tau_phi1_.resize(count);
  tau_phi2_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double l = -cfg_.sigma * basis_->eigenvalues()[i] + 2.0 * cfg_.potential.c - cfg_.alpha;
    const double z = l * tau;
    exp_l_[i] = std::exp(z);
    tau_phi1_[i] = tau * phi1(z);
    tau_phi2_[i] = tau * phi2(z);
  }
  work_.resize(basis_->grid_size());
}

void Etdrk2Stepper::nonlinear_term(const Field& u, Spectrum& out) {
  const auto values = u.values();
  for (std::size_t i = 0; i < work_.size(); ++i) {
    work_[i] = -flog1_prime(values[i], cfg_.potential) + cfg_.alpha * values[i];
  }
  basis_->to_spectrum(work_, out);
}

void Etdrk2Stepper::step(Field& u) {
  if (!u.basis().same_as(*basis_)) throw SolverError("stepper: field basis does not match");
  nonlinear_term(u, n_u_);
  const Spectrum& s = u.spectrum();
  Spectrum a_coeffs(s.n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    a_coeffs.coeffs[i] = exp_l_[i] * s.coeffs[i] + tau_phi1_[i] * n_u_.coeffs[i];
  }
  Field a = Field::from_spectrum(basis_, std::move(a_coeffs));
  nonlinear_term(a, n_a_);
  Spectrum& out = u.mutable_spectrum();
  const Spectrum& as = a.spectrum();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.coeffs[i] = as.coeffs[i] + tau_phi2_[i] * (n_a_.coeffs[i] - n_u_.coeffs[i]);
  }
  basis_->enforce_real(out);
}

// ---------------------------------------------------------------------------

Field step_stabilized(const Field& u, std::size_t j, const SolverConfig& cfg, const NoisePath& path) {
  StabilizedStepper stepper(u.basis_ptr(), cfg);
  Field next = u;
  if (cfg.noise.epsilon == 0.0) {
    stepper.step(next, nullptr);
  } else {
    const Spectrum dW = path.aggregate_increments(cfg.tau, j);
    stepper.step(next, &dW);
  }
  return next;
}

Field step_etdrk2(const Field& u, const SolverConfig& cfg) {
  if (cfg.noise.epsilon != 0.0) throw SolverError("ETDRK2 step called with a stochastic configuration");
  Etdrk2Stepper stepper(u.basis_ptr(), cfg);
  Field next = u;
  stepper.step(next);
  return next;
}

// ---------------------------------------------------------------------------

namespace {

TrajectoryRecord run_impl(const Field& u0, const SolverConfig& cfg, const NoisePath* path,
                          const TrajectoryOptions& options) {
  const BasisPtr& basis = u0.basis_ptr();
  cfg.validate(*basis);
  const std::size_t J = cfg.steps();
  const std::size_t every = std::max<std::size_t>(1, options.record_every);
  const double delta0 = options.delta0 < 0.0 ? cfg.potential.delta : options.delta0;

  std::set<std::size_t> snapshot_steps;
  for (double t : options.snapshot_times) {
    if (t < 0.0) continue;
    const auto j = static_cast<std::size_t>(std::llround(t / cfg.tau));
    snapshot_steps.insert(std::min(j, J));
  }

  std::size_t ratio = 1;
  if (path) {
    ratio = path->ratio(cfg.tau);
    if (path->steps() < J * ratio) throw std::invalid_argument("noise path shorter than the trajectory");
  }

  TrajectoryRecord rec;
  rec.seed = path ? path->seed() : cfg.seed;
  Field u = u0;

  auto record = [&](std::size_t j, bool blown) {
    const double t = static_cast<double>(j) * cfg.tau;
    DiagnosticsRow row;
    if (blown) {
      row.time = t;
      row.sup_norm = sup_norm(u);
      row.energy = std::numeric_limits<double>::infinity();
      row.blown_up = true;
    } else {
      row = compute_diagnostics(u, cfg.potential, cfg.sigma, delta0, t);
    }
    rec.times.push_back(t);
    rec.diagnostics.push_back(row);
    if (options.record_fields) rec.fields.push_back(u);
  };

  auto maybe_snapshot = [&](std::size_t j) {
    if (snapshot_steps.count(j)) rec.snapshots.push_back({static_cast<double>(j) * cfg.tau, u});
  };

  rec.max_sup_norm = sup_norm(u);
  record(0, false);
  maybe_snapshot(0);

  std::optional<StabilizedStepper> semi;
  std::optional<Etdrk2Stepper> etd;
  if (cfg.scheme == Scheme::StabilizedSemiImplicit) {
    semi.emplace(basis, cfg);
  } else {
    etd.emplace(basis, cfg);
  }
  const bool noisy = cfg.noise.epsilon != 0.0;
  std::optional<NoisePath> own_path;
  if (noisy && !path) {
    own_path.emplace(basis, cfg.seed, cfg.tau, J);
    path = &*own_path;
    ratio = 1;
  }
  Spectrum dW(basis->modes());

  for (std::size_t j = 0; j < J; ++j) {
    if (options.observer) options.observer(j, u);
    if (semi) {
      if (noisy) {
        if (ratio == 1) {
          path->sample_increment(j, dW);
        } else {
          path->aggregate_increments(cfg.tau, j, dW);
        }
        semi->step(u, &dW);
      } else {
        semi->step(u, nullptr);
      }
    } else {
      etd->step(u);
    }
    rec.steps_taken = j + 1;

    const double sup = sup_norm(u);
    rec.max_sup_norm = std::max(rec.max_sup_norm, sup);
    if (!std::isfinite(sup) || sup > cfg.blowup_threshold) {
      rec.blown_up = true;
      rec.blowup_time = static_cast<double>(j + 1) * cfg.tau;
      record(j + 1, true);
      break;
    }
    if ((j + 1) % every == 0 || j + 1 == J) record(j + 1, false);
    maybe_snapshot(j + 1);
  }
  if (!rec.blown_up && options.observer) options.observer(J, u);
  rec.final_state = std::move(u);
  return rec;
}

}  // namespace

TrajectoryRecord run_trajectory(const Field& u0, const SolverConfig& cfg, const TrajectoryOptions& options) {
  return run_impl(u0, cfg, nullptr, options);
}

TrajectoryRecord run_trajectory(const Field& u0, const SolverConfig& cfg, const NoisePath& path,
                                const TrajectoryOptions& options) {
  return run_impl(u0, cfg, &path, options);
}

}  // namespace logsac
