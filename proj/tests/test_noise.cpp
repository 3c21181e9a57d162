#include <doctest.h>

#include <cmath>
#include <numbers>

#include "logsac/noise.hpp"

using namespace logsac;

namespace {

// Wilson-Hilferty quantile of chi^2 with k degrees of freedom.
double chi2_quantile(double k, double z) {
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

constexpr double z995 = 2.5758293035489004;  // two-sided 99%

bool in_chi2_99(double statistic, double dof) {
  return statistic > chi2_quantile(dof, -z995) && statistic < chi2_quantile(dof, z995);
}

}  // namespace

TEST_CASE("sin^2(pi xi) vanishes exactly at integers") {
  for (int k = -3; k <= 3; ++k) CHECK(sin2pi(static_cast<double>(k)) == 0.0);
  CHECK(sin2pi(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sin2pi(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sin2pi(1.3) == doctest::Approx(std::pow(std::sin(std::numbers::pi * 1.3), 2)).epsilon(1e-14));
}

TEST_CASE("noise spec validation") {
  CHECK_NOTHROW(NoiseSpec::nemytskii(1.0).validate());
  CHECK_THROWS_AS(NoiseSpec::nemytskii(-1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::nemytskii(1.0, [](double x) { return x; }).validate(), std::invalid_argument);
  CHECK_NOTHROW(NoiseSpec::nemytskii(1.0, [](double x) { return 1 - x * x; }).validate());
  CHECK(NoiseSpec::additive(1.0).b(0.7) == 1.0);
  CHECK(noise_case_from_string("case2") == NoiseCase::Nemytskii);
  CHECK_THROWS(noise_case_from_string("other"));
}

TEST_CASE("mode weights") {
  auto b = SpectralBasis::create(Boundary::Periodic, 8);
  const auto q = mode_weights(*b);
  CHECK(q[static_cast<std::size_t>(b->position(1)) * 8 + b->position(-2)] == doctest::Approx(1.0 / 6));
  auto n = SpectralBasis::create(Boundary::Neumann, 8);
  CHECK(mode_weights(*n)[1 * 8 + 1] == doctest::Approx(1.0 / 3));
  CHECK(mode_weights(*n)[0] == 1.0);
  auto d = SpectralBasis::create(Boundary::Periodic, 8, true);
  CHECK(mode_weights(*d)[4 * 8 + 1] == 0.0);  // Nyquist excluded when dealiasing
}

TEST_CASE("increments are deterministic and seeds isolated") {
  auto b = SpectralBasis::create(Boundary::Periodic, 8);
  NoisePath p(b, 42, 1e-2, 10);
  const Spectrum a = p.sample_increment(3), c = p.sample_increment(3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.coeffs[i] == c.coeffs[i]);
  const Spectrum d = p.sample_increment(4);
  CHECK(a.coeffs[9] != d.coeffs[9]);
  CHECK(realization_seed(1, 0) != realization_seed(1, 1));
  CHECK(realization_seed(1, 5) == realization_seed(1, 5));
  CHECK_THROWS_AS(p.sample_increment(10), std::out_of_range);

  // Conjugate symmetry: the grid realization is real.
  CHECK(b->synthesis_imaginary_residue(a) < 1e-14);
}

TEST_CASE("increment variance (chi-square)") {
  const double tau = 1e-2;
  const std::size_t draws = 10000;
  {
    auto b = SpectralBasis::create(Boundary::Neumann, 8);
    NoisePath path(b, 2024, tau, draws);
    const double q = 1.0 / 3.0;
    double stat = 0.0, mean = 0.0;
    Spectrum s(8);
    for (std::size_t j = 0; j < draws; ++j) {
      path.sample_increment(j, s);
      stat += std::norm(s(1, 1)) / (q * tau);
      mean += s(1, 1).real();
      CHECK(s(1, 1).imag() == 0.0);
    }
    CHECK(in_chi2_99(stat, static_cast<double>(draws)));
    mean /= static_cast<double>(draws);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(q * tau / draws));
  }
  {
    auto b = SpectralBasis::create(Boundary::Periodic, 8);
    NoisePath path(b, 99, tau, draws);
    const int p = b->position(1), r = b->position(1);
    const double q = 1.0 / 3.0;
    double stat = 0.0;
    Spectrum s(8);
    for (std::size_t j = 0; j < draws; ++j) {
      path.sample_increment(j, s);
      stat += std::norm(s(p, r)) / (q * tau / 2);  // two real components
    }
    CHECK(in_chi2_99(stat, 2.0 * draws));
  }
}

TEST_CASE("aggregation") {
  auto b = SpectralBasis::create(Boundary::Neumann, 8);
  const double tau = 1e-2;
  NoisePath path(b, 5, tau, 10000);
  const Spectrum one = path.aggregate_increments(tau, 7);
  const Spectrum fine = path.sample_increment(7);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one.coeffs[i] == fine.coeffs[i]);

  const Spectrum whole = path.aggregate_increments(4 * tau, 3);
  Spectrum halves = path.aggregate_increments(2 * tau, 6);
  halves += path.aggregate_increments(2 * tau, 7);
  for (std::size_t i = 0; i < whole.size(); ++i) CHECK(std::abs(whole.coeffs[i] - halves.coeffs[i]) < 1e-15);

  double stat = 0.0;
  const double q = 1.0 / (1 + 4 + 1);
  for (std::size_t j = 0; j < 2500; ++j) {
    const Spectrum s = path.aggregate_increments(4 * tau, j);
    stat += std::norm(s(2, 1)) / (q * 4 * tau);
  }
  CHECK(in_chi2_99(stat, 2500.0));
  CHECK_THROWS_AS(path.ratio(2.5 * tau), std::invalid_argument);
  CHECK(path.ratio(3 * tau) == 3);
}

TEST_CASE("grid-point variance of an additive increment") {
  auto b = SpectralBasis::create(Boundary::Periodic, 8);
  const double tau = 1e-2;
  const std::size_t draws = 10000;
  NoisePath path(b, 77, tau, draws);
  const auto x = b->coordinates();
  const std::size_t ix = 3, iy = 5;
  double expected = 0.0;
  const auto q = mode_weights(*b);
  for (int p = 0; p < 8; ++p) {
    for (int r = 0; r < 8; ++r) expected += q[p * 8 + r] * std::norm(b->basis_function(p, r, x[ix], x[iy]));
  }
  expected *= tau;
  double sum_sq = 0.0;
  const Field zero = Field::constant(b, 0.0);
  for (std::size_t j = 0; j < draws; ++j) {
    const Field w = apply_diffusion(zero, path.sample_increment(j), NoiseSpec::additive(1.0));
    const double v = w.values()[ix * 8 + iy];
    sum_sq += v * v;
  }
  const double var = sum_sq / draws;
  CHECK(std::abs(var - expected) < 4.0 * std::sqrt(2.0 / draws) * expected);
}

TEST_CASE("diffusion operator") {
  for (auto bc : {Boundary::Periodic, Boundary::Neumann}) {
    auto b = SpectralBasis::create(bc, 8);
    NoisePath path(b, 3, 1e-2, 4);
    const Spectrum dw = path.sample_increment(1);
    const Field u = Field::constant(b, 0.3);

    const Field zero_eps = apply_diffusion(u, dw, NoiseSpec::nemytskii(0.0));
    CHECK(sup_norm(zero_eps) == 0.0);

    // b(+-1) = 0: the pure phases receive no noise.
    std::vector<double> phases(b->grid_size());
    for (std::size_t i = 0; i < phases.size(); ++i) phases[i] = i % 3 ? 1.0 : -1.0;
    CHECK(sup_norm(apply_diffusion(Field::from_grid(b, phases), dw, NoiseSpec::nemytskii(1.0))) == 0.0);
    CHECK(sup_norm(apply_diffusion(Field::constant(b, 1.0), dw, NoiseSpec::nemytskii(1.0))) == 0.0);

    const Field additive = apply_diffusion(u, dw, NoiseSpec::additive(1.0));
    CHECK(grid_l2_norm_sq(additive) == doctest::Approx(l2_norm_sq(dw)).epsilon(1e-12));

    // Nemytskii with constant u: eps b(0.3) times the increment.
    const Field scaled = apply_diffusion(u, dw, NoiseSpec::nemytskii(2.0));
    const double factor = 2.0 * sin2pi(0.3);
    for (std::size_t i = 0; i < dw.size(); ++i) {
      CHECK(std::abs(scaled.spectrum().coeffs[i] - factor * dw.coeffs[i]) < 1e-14);
    }
    CHECK_THROWS_AS(apply_diffusion(u, Spectrum(4), NoiseSpec::additive(1.0)), std::invalid_argument);
  }
}
