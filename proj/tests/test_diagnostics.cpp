#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "logsac/diagnostics.hpp"
#include "logsac/solver.hpp"

using namespace logsac;

TEST_CASE("energy of constant fields") {
  auto b = SpectralBasis::create(Boundary::Neumann, 16);
  CHECK(energy(Field::constant(b, 0.0), {0.0, 1.5}, 1.0) == 0.0);
  CHECK(energy(Field::constant(b, 0.0), {0.01, 1.5}, 1.0) == doctest::Approx(4 * flog_delta(0.0, {0.01, 1.5})));
  const double e = energy(Field::constant(b, 0.2), {0.0, 1.5}, 0.3);
  const double oracle = 4 * (1.2 * std::log(1.2) + 0.8 * std::log(0.8) - 1.5 * 0.04);
  CHECK(e == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(e == doctest::Approx(-0.078915891594489013).epsilon(1e-12));
  CHECK(std::abs(e - (-0.0789157)) < 5e-7);
  CHECK_THROWS_AS(energy(Field::constant(b, 1.1), {0.0, 1.5}, 1.0), std::domain_error);
  CHECK(std::isfinite(energy(Field::constant(b, 1.1), {1e-18, 1.5}, 1.0)));
}

TEST_CASE("energy of a single cosine mode against dense quadrature") {
  auto b = SpectralBasis::create(Boundary::Neumann, 32);
  const double a = 0.1, sigma = 0.7;
  const PotentialParams p{1e-3, 1.5};
  Spectrum s(32);
  s(1, 0) = a;
  const double e = energy(Field::from_spectrum(b, s), p, sigma);
  // u(x, y) = a cos(pi (x + 1) / 2) / sqrt(2): independent of y, so the y integral is 2.
  const int n = 200000;
  long double quad = 0.0L;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (2.0 * i + 1.0) / n;
    quad += flog_delta(a * std::cos(std::numbers::pi * (x + 1) / 2) / std::sqrt(2.0), p);
  }
  const double oracle = 0.5 * sigma * a * a * b->eigenvalue(1, 0) + 2.0 * static_cast<double>(quad * 2.0L / n);
  CHECK(std::abs(e - oracle) < 1e-8);
}

TEST_CASE("tail norms and violation measure") {
  auto b = SpectralBasis::create(Boundary::Neumann, 8);
  auto [u1, l1] = tail_norms(Field::constant(b, 0.5));
  CHECK(u1 == 0.0);
  CHECK(l1 == 0.0);
  auto [u2, l2] = tail_norms(Field::constant(b, 1.2));
  CHECK(u2 == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(l2 == 0.0);
  auto [u3, l3] = tail_norms(Field::constant(b, -1.2));
  CHECK(u3 == 0.0);
  CHECK(l3 == doctest::Approx(0.4).epsilon(1e-13));

  CHECK(violation_measure(Field::constant(b, 0.9), 0.0) == 0.0);
  CHECK(violation_measure(Field::constant(b, 1.2), 0.1) == doctest::Approx(4.0));
  CHECK(violation_measure(Field::constant(b, 1.2), 0.3) == 0.0);
  CHECK_THROWS_AS(violation_measure(Field::constant(b, 1.2), -0.1), std::invalid_argument);
}

TEST_CASE("tails vanish exactly when the violation set is empty; Chebyshev link") {
  auto b = SpectralBasis::create(Boundary::Periodic, 16);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(b->grid_size());
    for (auto& x : v) x = n(rng);
    const Field u = Field::from_grid(b, v);
    const auto [up, low] = tail_norms(u);
    const bool inside = violation_measure(u, 0.0) == 0.0;
    CHECK(inside == (up == 0.0 && low == 0.0));
    for (double d0 : {0.05, 0.2, 0.5}) {
      CHECK(violation_measure(u, d0) <= (up * up + low * low) / (d0 * d0) * (1 + 1e-12));
    }
  }
}

TEST_CASE("energy converges monotonically as delta decreases") {
  auto b = SpectralBasis::create(Boundary::Neumann, 16);
  Spectrum s(16);
  s(0, 0) = 0.4;
  s(1, 2) = 0.5;
  const Field u = Field::from_spectrum(b, s);
  REQUIRE(sup_norm(u) < 1.0);
  const double limit = energy(u, {0.0, 1.5}, 1.0);
  double previous = INFINITY;
  for (double delta : {1e-1, 1e-2, 1e-4, 1e-6, 1e-8}) {
    const double gap = std::abs(energy(u, {delta, 1.5}, 1.0) - limit);
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("Wilson interval and violation probability") {
  const auto w = wilson_interval(50, 100);
  const double z = 1.959963984540054, n = 100.0, p = 0.5;
  const double centre = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(w.estimate == 0.5);
  CHECK(w.lower == doctest::Approx(centre - half).epsilon(1e-14));
  CHECK(w.upper == doctest::Approx(centre + half).epsilon(1e-14));

  const std::vector<double> bounded = {0.9, 0.99, 1.0};
  const auto none = bound_violation_probability(std::span<const double>(bounded), 0.0);
  CHECK(none.estimate == 0.0);
  CHECK(none.lower == 0.0);
  const std::vector<double> mixed = {1.5, 0.9, 2.0, 0.8};
  CHECK(bound_violation_probability(std::span<const double>(mixed), 0.1).estimate == 0.5);
  const std::vector<double> all = {std::numeric_limits<double>::infinity(), 5.0};
  CHECK(bound_violation_probability(std::span<const double>(all), 0.1).estimate == 1.0);
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(bound_violation_probability(std::span<const double>(one), 0.1), std::invalid_argument);

  std::vector<TrajectoryRecord> recs(2);
  recs[0].max_sup_norm = 0.5;
  recs[1].max_sup_norm = 0.5;
  recs[1].blown_up = true;
  CHECK(bound_violation_probability(std::span<const TrajectoryRecord>(recs), 0.1).estimate == 0.5);
}

TEST_CASE("diagnostics CSV") {
  std::ostringstream os;
  std::vector<DiagnosticsRow> rows(1);
  rows[0].time = 0.5;
  rows[0].blown_up = true;
  write_diagnostics_csv(os, rows);
  CHECK(os.str().rfind("time,energy,sup_norm,tail_upper,tail_lower,violation_measure,blown_up\n0.5,", 0) == 0);
  CHECK(os.str().find(",1\n") != std::string::npos);
}
