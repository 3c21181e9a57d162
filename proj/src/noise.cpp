#include "logsac/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace logsac {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return splitmix_finalize(splitmix_finalize(a + kGolden) ^ (b * kGolden + 0x632BE59BD9B4E019ull));
}

// splitmix64 stream with Box-Muller normals; portable across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t state) : state_(state) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t next_u64() {
    state_ += kGolden;
    return splitmix_finalize(state_);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

std::string to_string(NoiseCase c) { return c == NoiseCase::Additive ? "additive" : "nemytskii"; }

NoiseCase noise_case_from_string(const std::string& name) {
  if (name == "additive" || name == "case1") return NoiseCase::Additive;
  if (name == "nemytskii" || name == "case2") return NoiseCase::Nemytskii;
  throw std::invalid_argument("unknown noise case '" + name + "' (expected additive or nemytskii)");
}

double sin2pi(double xi) {
  const double s = std::sin(std::numbers::pi * (xi - std::nearbyint(xi)));
  return s * s;
}

NoiseSpec NoiseSpec::additive(double epsilon) { return NoiseSpec{NoiseCase::Additive, epsilon, {}}; }

NoiseSpec NoiseSpec::nemytskii(double epsilon, std::function<double(double)> b) {
  return NoiseSpec{NoiseCase::Nemytskii, epsilon, std::move(b)};
}

double NoiseSpec::b(double xi) const {
  if (kind == NoiseCase::Additive) return 1.0;
  return diffusion ? diffusion(xi) : sin2pi(xi);
}

void NoiseSpec::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("noise: epsilon must be a finite value >= 0");
  }
  if (kind == NoiseCase::Nemytskii && diffusion) {
    if (std::abs(diffusion(1.0)) > 1e-12 || std::abs(diffusion(-1.0)) > 1e-12) {
      throw std::invalid_argument("noise: Nemytskii diffusion must vanish at +1 and -1");
    }
  }
}

std::vector<double> mode_weights(const SpectralBasis& basis) {
  std::vector<double> q(basis.mode_count(), 0.0);
  const int n = basis.modes();
  for (int p = 0; p < n; ++p) {
    const double k = basis.wavenumber(p);
    for (int r = 0; r < n; ++r) {
      if (!basis.retained(p, r)) continue;
      const double l = basis.wavenumber(r);
      q[static_cast<std::size_t>(p) * n + r] = 1.0 / (1.0 + k * k + l * l);
    }
  }
  return q;
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t m) { return mix64(base_seed, m); }

NoisePath::NoisePath(BasisPtr basis, std::uint64_t seed, double fine_tau, std::size_t steps)
    : basis_(std::move(basis)), seed_(seed), fine_tau_(fine_tau), steps_(steps) {
  if (!(fine_tau > 0.0)) throw std::invalid_argument("noise path: fine_tau must be > 0");
  const auto q = mode_weights(*basis_);
  scale_.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) scale_[i] = std::sqrt(q[i] * fine_tau_);

  const int n = basis_->modes();
  partner_.resize(basis_->mode_count());
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) {
      const std::size_t idx = static_cast<std::size_t>(p) * n + r;
      if (basis_->bc() == Boundary::Neumann) {
        partner_[idx] = static_cast<std::uint32_t>(idx);
      } else {
        const int pp = (n - p) % n;
        const int rr = (n - r) % n;
        partner_[idx] = static_cast<std::uint32_t>(static_cast<std::size_t>(pp) * n + rr);
      }
    }
  }
}

void NoisePath::sample_increment(std::size_t j, Spectrum& out) const {
  if (j >= steps_) throw std::out_of_range("noise path: step index beyond path length");
  if (out.n != basis_->modes()) out = Spectrum(basis_->modes());
  GaussianStream g(mix64(seed_, j));
  const std::size_t count = out.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t partner = partner_[i];
    if (partner == i) {
      out.coeffs[i] = {scale_[i] * g.next(), 0.0};
    } else if (i < partner) {
      const double s = scale_[i] * (1.0 / std::numbers::sqrt2);
      const double re = g.next();
      const double im = g.next();
      out.coeffs[i] = {s * re, s * im};
    } else {
      out.coeffs[i] = std::conj(out.coeffs[partner]);
    }
  }
}

Spectrum NoisePath::sample_increment(std::size_t j) const {
  Spectrum out(basis_->modes());
  sample_increment(j, out);
  return out;
}

std::size_t NoisePath::ratio(double coarse_tau) const {
  const double r = coarse_tau / fine_tau_;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("coarse step is not an integer multiple of the fine noise step");
  }
  return static_cast<std::size_t>(rounded);
}

void NoisePath::aggregate_increments(double coarse_tau, std::size_t j_coarse, Spectrum& out) const {
  const std::size_t r = ratio(coarse_tau);
  if (out.n != basis_->modes()) out = Spectrum(basis_->modes());
  sample_increment(r * j_coarse, out);
  Spectrum tmp(basis_->modes());
  for (std::size_t k = 1; k < r; ++k) {
    sample_increment(r * j_coarse + k, tmp);
    out += tmp;
  }
}

Spectrum NoisePath::aggregate_increments(double coarse_tau, std::size_t j_coarse) const {
  Spectrum out(basis_->modes());
  aggregate_increments(coarse_tau, j_coarse, out);
  return out;
}

void apply_diffusion(const Field& u, const Spectrum& dW, const NoiseSpec& spec, Spectrum& out) {
  const SpectralBasis& basis = u.basis();
  if (dW.n != basis.modes()) throw std::invalid_argument("noise increment does not match the field basis");
  if (spec.kind == NoiseCase::Additive) {
    out = dW;
    out *= spec.epsilon;
    return;
  }
  if (out.n != basis.modes()) out = Spectrum(basis.modes());
  if (spec.epsilon == 0.0) {
    out.set_zero();
    return;
  }
  thread_local std::vector<double> w;
  w.resize(basis.grid_size());
  basis.to_grid(dW, w);
  const auto values = u.values();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= spec.epsilon * spec.b(values[i]);
  basis.to_spectrum(w, out);
}

Field apply_diffusion(const Field& u, const Spectrum& dW, const NoiseSpec& spec) {
  Spectrum out(u.basis().modes());
  apply_diffusion(u, dW, spec, out);
  return Field::from_spectrum(u.basis_ptr(), std::move(out));
}

}  // namespace logsac
