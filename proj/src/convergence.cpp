#include "logsac/convergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "logsac/ensemble.hpp"

namespace logsac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Level {
  SolverConfig cfg;
  std::size_t ratio = 1;
  std::size_t steps = 0;
  std::unique_ptr<StabilizedStepper> stepper;
  Field u;
  Spectrum dw;
  bool blown = false;
};

bool diverged(const Field& u, double threshold) {
  const double s = sup_norm(u);
  return !std::isfinite(s) || s > threshold;
}

double squared_distance(const Spectrum& a, const Spectrum& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a.coeffs[i] - b.coeffs[i]);
  return sum;
}

// One realization: the reference and every ladder level advance in lockstep
// over the fine increments, so each increment is generated exactly once.
std::vector<double> coupled_realization(const Field& u0, const SolverConfig& cfg,
                                        const std::vector<double>& ladder, double tau_ref) {
  const BasisPtr& basis = u0.basis_ptr();
  SolverConfig ref_cfg = cfg;
  ref_cfg.tau = tau_ref;
  const std::size_t fine_steps = ref_cfg.steps();
  NoisePath path(basis, cfg.seed, tau_ref, fine_steps);
  const bool noisy = cfg.noise.epsilon != 0.0;

  StabilizedStepper ref_stepper(basis, ref_cfg);
  Field ref = u0;
  bool ref_blown = false;

  std::vector<Level> levels(ladder.size());
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    Level& l = levels[k];
    l.cfg = cfg;
    l.cfg.tau = ladder[k];
    l.steps = l.cfg.steps();
    l.ratio = path.ratio(ladder[k]);
    if (l.ratio * l.steps != fine_steps) throw std::invalid_argument("coupled run: ladder does not tile T");
    l.stepper = std::make_unique<StabilizedStepper>(basis, l.cfg);
    l.u = u0;
    l.dw = Spectrum(basis->modes());
  }

  Spectrum dw(basis->modes());
  for (std::size_t j = 0; j < fine_steps; ++j) {
    if (noisy) path.sample_increment(j, dw);
    if (!ref_blown) {
      ref_stepper.step(ref, noisy ? &dw : nullptr);
      ref_blown = diverged(ref, cfg.blowup_threshold);
    }
    for (Level& l : levels) {
      if (noisy) l.dw += dw;
      if ((j + 1) % l.ratio != 0) continue;
      if (!l.blown) {
        l.stepper->step(l.u, noisy ? &l.dw : nullptr);
        l.blown = diverged(l.u, cfg.blowup_threshold);
      }
      l.dw.set_zero();
    }
  }

  std::vector<double> out(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    out[k] = ref_blown || levels[k].blown ? kInf : squared_distance(levels[k].u.spectrum(), ref.spectrum());
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> coupled_squared_errors(const Field& u0, const SolverConfig& cfg,
                                                        const std::vector<double>& tau_ladder, double tau_ref,
                                                        std::size_t realizations, unsigned threads) {
  if (realizations == 0) throw std::invalid_argument("strong error: need at least one realization");
  if (tau_ladder.empty()) throw std::invalid_argument("strong error: empty tau ladder");
  SolverConfig check = cfg;
  check.tau = tau_ref;
  check.validate(u0.basis());
  for (double tau : tau_ladder) {
    check.tau = tau;
    check.validate(u0.basis());
  }
  u0.values();
  u0.spectrum();
  return parallel_map<std::vector<double>>(
      realizations,
      [&](std::size_t m) { return coupled_realization(u0, realization_config(cfg, m), tau_ladder, tau_ref); },
      threads);
}

StrongError summarize_strong_error(double tau, const std::vector<double>& squared_errors) {
  StrongError e;
  e.tau = tau;
  const std::size_t n = squared_errors.size();
  if (n == 0) throw std::invalid_argument("strong error: no realizations");
  double total = 0.0;
  for (double v : squared_errors) {
    if (!std::isfinite(v)) ++e.blown_up;
    total += v;
  }
  e.error = std::sqrt(total / static_cast<double>(n));
  if (n < 2 || !std::isfinite(total)) {
    e.stderr_ = n < 2 ? 0.0 : kInf;
    return e;
  }
  std::vector<double> loo(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = std::sqrt(std::max(0.0, total - squared_errors[i]) / static_cast<double>(n - 1));
    mean += loo[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  e.stderr_ = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  return e;
}

std::vector<StrongError> strong_errors(const Field& u0, const SolverConfig& cfg,
                                       const std::vector<double>& tau_ladder, double tau_ref,
                                       std::size_t realizations, unsigned threads) {
  const auto rows = coupled_squared_errors(u0, cfg, tau_ladder, tau_ref, realizations, threads);
  std::vector<StrongError> out;
  for (std::size_t k = 0; k < tau_ladder.size(); ++k) {
    std::vector<double> column(rows.size());
    for (std::size_t m = 0; m < rows.size(); ++m) column[m] = rows[m][k];
    out.push_back(summarize_strong_error(tau_ladder[k], column));
  }
  return out;
}

StrongError strong_error(const Field& u0, const SolverConfig& cfg, double tau_coarse, double tau_ref,
                         std::size_t realizations, unsigned threads) {
  return strong_errors(u0, cfg, {tau_coarse}, tau_ref, realizations, threads).front();
}

OrderFit estimate_order(const std::vector<double>& taus, const std::vector<double>& errors) {
  if (taus.size() != errors.size()) throw std::invalid_argument("order fit: size mismatch");
  if (taus.size() < 3) throw std::invalid_argument("order fit: need at least three points");
  const double n = static_cast<double>(taus.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx(taus.size()), ly(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0) || !(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw std::invalid_argument("order fit: step sizes and errors must be positive and finite");
    }
    lx[i] = std::log(taus[i]);
    ly[i] = std::log(errors[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("order fit: step sizes must not all be equal");
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.taus = taus;
  fit.errors = errors;
  fit.stderrs.assign(taus.size(), 0.0);
  return fit;
}

OrderFit estimate_order(const std::vector<StrongError>& errors) {
  std::vector<double> taus, values, se;
  for (const auto& e : errors) {
    taus.push_back(e.tau);
    values.push_back(e.error);
    se.push_back(e.stderr_);
  }
  OrderFit fit = estimate_order(taus, values);
  fit.stderrs = se;
  return fit;
}

}  // namespace logsac
