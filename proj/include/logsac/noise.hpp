#pragma once

// Q-Wiener increments in the Laplacian eigenbasis and the diffusion operator
// B(u). Mode (k, l) carries weight q_{k,l} = 1 / (1 + k^2 + l^2), keyed to the
// signed Fourier wavenumbers (periodic) or the cosine mode integers (Neumann).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logsac/spectral.hpp"

namespace logsac {

enum class NoiseCase {
  Additive,   // B(u) = identity, b == 1
  Nemytskii,  // B(u) w = b(u) w pointwise, b(+-1) = 0
};

std::string to_string(NoiseCase c);
NoiseCase noise_case_from_string(const std::string& name);

/// sin^2(pi xi), evaluated through the reduced argument so it vanishes exactly
/// at every integer.
double sin2pi(double xi);

struct NoiseSpec {
  NoiseCase kind = NoiseCase::Nemytskii;
  double epsilon = 0.0;
  /// Pointwise diffusion b for the Nemytskii case; empty selects sin2pi.
  std::function<double(double)> diffusion;

  static NoiseSpec additive(double epsilon);
  static NoiseSpec nemytskii(double epsilon, std::function<double(double)> b = {});

  double b(double xi) const;
  /// Throws std::invalid_argument for epsilon < 0 or a Nemytskii b that does
  /// not vanish at +-1.
  void validate() const;
};

/// q_{k,l} per storage position; zero for modes outside the retained set.
std::vector<double> mode_weights(const SpectralBasis& basis);

/// Seed of realization m, derived from the base seed by a fixed 64-bit mix.
std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t m);

/// Brownian increments on a fine time grid, generated on demand from
/// (seed, step index). Increment j of mode (k, l) is a centred Gaussian with
/// E|dW|^2 = q_{k,l} * fine_tau; periodic increments are conjugate-symmetric.
class NoisePath {
 public:
  NoisePath(BasisPtr basis, std::uint64_t seed, double fine_tau, std::size_t steps);

  std::uint64_t seed() const { return seed_; }
  double fine_tau() const { return fine_tau_; }
  std::size_t steps() const { return steps_; }
  const SpectralBasis& basis() const { return *basis_; }

  void sample_increment(std::size_t j, Spectrum& out) const;
  Spectrum sample_increment(std::size_t j) const;

  /// Number of fine steps per coarse step; throws std::invalid_argument unless
  /// coarse_tau is an integer multiple of fine_tau (1e-9 relative).
  std::size_t ratio(double coarse_tau) const;

  /// Sum of the fine increments r*j_coarse, ..., r*(j_coarse + 1) - 1.
  void aggregate_increments(double coarse_tau, std::size_t j_coarse, Spectrum& out) const;
  Spectrum aggregate_increments(double coarse_tau, std::size_t j_coarse) const;

 private:
  BasisPtr basis_;
  std::uint64_t seed_;
  double fine_tau_;
  std::size_t steps_;
  std::vector<double> scale_;         // sqrt(q * fine_tau)
  std::vector<std::uint32_t> partner_;  // conjugate partner storage index
};

/// eps * P^N (b(u) w), where w is the grid realization of dW. The additive
/// case returns eps * dW.
void apply_diffusion(const Field& u, const Spectrum& dW, const NoiseSpec& spec, Spectrum& out);
Field apply_diffusion(const Field& u, const Spectrum& dW, const NoiseSpec& spec);

}  // namespace logsac
