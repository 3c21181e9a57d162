#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "logsac/config.hpp"
#include "logsac/convergence.hpp"
#include "logsac/ensemble.hpp"
#include "logsac/experiments.hpp"
#include "logsac/initial_condition.hpp"

using namespace logsac;

namespace {

SolverConfig small_config() {
  SolverConfig cfg;
  cfg.n_modes = 8;
  cfg.tau = 1e-2;
  cfg.T = 0.1;
  cfg.potential = {1e-4, 1.5};
  cfg.noise = NoiseSpec::nemytskii(1.0);
  cfg.seed = 3;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("logsac_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("expression parser") {
  CHECK(parse_expression("1 + 2 * 3")(0, 0) == 7.0);
  CHECK(parse_expression("-2^2")(0, 0) == -4.0);
  CHECK(parse_expression("2^3^2")(0, 0) == 512.0);
  CHECK(parse_expression("(1 + 2) / 4")(0, 0) == 0.75);
  CHECK(parse_expression("x - y")(3, 1) == 2.0);
  CHECK(parse_expression("cos(pi * x)")(1, 0) == doctest::Approx(-1.0));
  CHECK(parse_expression("exp(0) + sqrt(4) + abs(-1)")(0, 0) == 4.0);
  CHECK(parse_expression("1e-2 * 3")(0, 0) == doctest::Approx(0.03));
  CHECK_THROWS_AS(parse_expression("1 +"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("foo(1)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("(1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("1 2"), std::invalid_argument);
}

TEST_CASE("initial condition presets") {
  // With an even number of cell-centred points, 0 is not a grid point; use an
  // odd count on a dealiased grid instead: N = 22, M = 33 has x = 0 at i = 16.
  auto b = SpectralBasis::create(Boundary::Neumann, 22, true);
  REQUIRE(b->grid_points() == 33);
  REQUIRE(std::abs(b->coordinates()[16]) < 1e-15);
  const Field f4 = initial_condition("fig4", b);
  CHECK(f4.values()[16 * 33 + 16] == doctest::Approx(0.8).epsilon(1e-12));

  auto n = SpectralBasis::create(Boundary::Neumann, 32);
  CHECK(sup_norm(initial_condition("zero", n)) == 0.0);
  const Field f1 = initial_condition("fig1", n);
  CHECK(sup_norm(f1) < 1.0);
  CHECK(sup_norm(initial_condition("fig1/3", n)) == sup_norm(f1));
  CHECK(resolve_initial_condition("fig6") == resolve_initial_condition("fig5"));
  CHECK_THROWS_AS(initial_condition("fig9", n), std::invalid_argument);
}

TEST_CASE("parallel_for propagates the first exception") {
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::size_t i) { hit[i] = 1; }, 4);
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(
                      10, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
}

TEST_CASE("ensembles are deterministic and seed-isolated") {
  auto b = SpectralBasis::create(Boundary::Neumann, 8);
  const Field u0 = initial_condition("fig1", b);
  const SolverConfig cfg = small_config();

  const auto one = run_ensemble(u0, cfg, 1);
  const auto single = run_trajectory(u0, realization_config(cfg, 0));
  for (std::size_t i = 0; i < b->grid_size(); ++i) CHECK(one[0].final_state.values()[i] == single.final_state.values()[i]);

  const auto a = run_ensemble(u0, cfg, 8, {}, 3);
  const auto c = run_ensemble(u0, cfg, 8, {}, 1);
  for (std::size_t m = 0; m < 8; ++m) {
    for (std::size_t i = 0; i < b->grid_size(); ++i) CHECK(a[m].final_state.values()[i] == c[m].final_state.values()[i]);
  }
  // Realization 5 alone is the same trajectory.
  const auto five = run_trajectory(u0, realization_config(cfg, 5));
  for (std::size_t i = 0; i < b->grid_size(); ++i) CHECK(a[5].final_state.values()[i] == five.final_state.values()[i]);
  CHECK(a[5].seed != a[4].seed);
}

TEST_CASE("ensemble mean after one step matches the deterministic step") {
  auto b = SpectralBasis::create(Boundary::Neumann, 8);
  const Field u0 = initial_condition("fig1", b);
  SolverConfig cfg = small_config();
  cfg.T = cfg.tau;
  cfg.noise = NoiseSpec::nemytskii(0.5);
  const std::size_t M = 400;
  const auto recs = run_ensemble(u0, cfg, M);
  SolverConfig det = cfg;
  det.noise.epsilon = 0.0;
  const auto d = run_trajectory(u0, det);
  const std::size_t probe = 27;
  double mean = 0.0, sq = 0.0;
  for (const auto& r : recs) {
    const double v = r.final_state.values()[probe] - d.final_state.values()[probe];
    mean += v;
    sq += v * v;
  }
  mean /= M;
  const double se = std::sqrt((sq / M - mean * mean) / (M - 1));
  CHECK(se > 0.0);
  CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("strong error coupling") {
  auto b = SpectralBasis::create(Boundary::Neumann, 8);
  const Field u0 = initial_condition("fig1", b);
  SolverConfig cfg = small_config();
  cfg.T = 0.08;
  const auto same = strong_error(u0, cfg, 1e-2, 1e-2, 4);
  CHECK(same.error == 0.0);
  CHECK_THROWS_AS(strong_error(u0, cfg, 1.5e-2, 1e-2, 2), std::invalid_argument);

  // Deterministic linear regime: the error halves with tau.
  SolverConfig lin = small_config();
  lin.noise.epsilon = 0.0;
  lin.potential.delta = 1e6;
  lin.T = 0.16;
  const auto errs = strong_errors(u0, lin, {4e-2, 2e-2, 1e-2}, 1.25e-3, 1);
  CHECK(errs[0].error / errs[1].error == doctest::Approx(2.0).epsilon(0.15));
  CHECK(errs[1].error / errs[2].error == doctest::Approx(2.0).epsilon(0.15));

  // Stochastic: positive and decreasing along the ladder.
  cfg.T = 0.08;
  const auto noisy = strong_errors(u0, cfg, {2e-2, 1e-2, 5e-3}, 1.25e-3, 16);
  for (const auto& e : noisy) {
    CHECK(e.error > 0.0);
    CHECK(e.stderr_ > 0.0);
  }
  CHECK(noisy[0].error > noisy[1].error);
  CHECK(noisy[1].error > noisy[2].error);
}

TEST_CASE("jackknife standard error") {
  const auto e = summarize_strong_error(0.1, {1.0, 1.0, 1.0, 1.0});
  CHECK(e.error == 1.0);
  CHECK(e.stderr_ == doctest::Approx(0.0).epsilon(1e-15));
  const auto f = summarize_strong_error(0.1, {1.0, 4.0});
  CHECK(f.error == doctest::Approx(std::sqrt(2.5)));
  // Leave-one-out values 2 and 1: sqrt(1/2 * (0.25 + 0.25)).
  CHECK(f.stderr_ == doctest::Approx(0.5));
}

TEST_CASE("order fit") {
  std::vector<double> taus = {1e-1, 5e-2, 2.5e-2, 1.25e-2};
  std::vector<double> half, one;
  for (double t : taus) {
    half.push_back(3.0 * std::sqrt(t));
    one.push_back(0.7 * t);
  }
  const auto f = estimate_order(taus, half);
  CHECK(std::abs(f.slope - 0.5) < 1e-12);
  CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-12);
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(std::abs(estimate_order(taus, one).slope - 1.0) < 1e-12);
  CHECK_THROWS_AS(estimate_order(taus, {1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(estimate_order({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("config parsing and validation") {
  const auto c = config_from_json_text(R"({"experiment": "converge", "realizations": 7, "delta": 0.1})");
  CHECK(c.experiment == ExperimentKind::Converge);
  CHECK(c.realizations == 7);
  CHECK(c.solver.potential.delta == 0.1);
  CHECK(c.tau_ladder.size() == 5);
  const auto round = config_from_json_text(config_to_json_text(c));
  CHECK(config_to_json_text(round) == config_to_json_text(c));

  CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"tau": 0.03, "T": 0.1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"experiment": "converge", "tau_ref": 3e-3})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"initial_condition": "cos(("})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"experiment": "energy-scan", "delta_ladder": [1e-4, 1e-2]})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"realizations": 0})"), ConfigError);
  for (auto k : {ExperimentKind::Simulate, ExperimentKind::Converge, ExperimentKind::EnergyScan,
                 ExperimentKind::Coarsen, ExperimentKind::BlowupDemo, ExperimentKind::EnergyLaw}) {
    CHECK_NOTHROW(default_config(k).validate());
  }
}

TEST_CASE("experiment drivers at toy scale") {
  SUBCASE("energy scan with identical deltas gives identical columns") {
    ExperimentConfig c = default_config(ExperimentKind::EnergyScan);
    c.solver.n_modes = 8;
    c.solver.T = 0.2;
    c.realizations = 3;
    c.delta_ladder = {1e-4, 1e-4};
    const auto r = run_energy_scan(c);
    CHECK(r.mean_energy[0] == r.mean_energy[1]);
    CHECK(r.gaps[0] == 0.0);
  }
  SUBCASE("eps = 0 scan column equals the deterministic energy") {
    ExperimentConfig c = default_config(ExperimentKind::EnergyScan);
    c.solver.n_modes = 8;
    c.solver.T = 0.2;
    c.realizations = 2;
    c.solver.noise.epsilon = 0.0;
    c.delta_ladder = {1e-2};
    const auto r = run_energy_scan(c);
    SolverConfig s = c.solver;
    s.potential.delta = 1e-2;
    const auto d = run_trajectory(initial_condition("fig4", c.make_basis()), s);
    for (std::size_t i = 0; i < d.diagnostics.size(); ++i) CHECK(r.mean_energy[0][i] == d.diagnostics[i].energy);
  }
  SUBCASE("coarsening with eps = 0 reproduces the deterministic semi-implicit path") {
    ExperimentConfig c = default_config(ExperimentKind::Coarsen);
    c.solver.n_modes = 16;
    c.solver.T = 0.5;
    c.epsilon_ladder = {0.0};
    c.record_every = 1;
    const auto r = run_coarsen(c);
    SolverConfig s = c.solver;
    s.noise.epsilon = 0.0;
    const auto d = run_trajectory(initial_condition("fig5", c.make_basis()), s);
    for (std::size_t i = 0; i < d.diagnostics.size(); ++i) CHECK(r.energy[0][i] == d.diagnostics[i].energy);
    CHECK(r.max_deviation[0] < 1e-3);
  }
  SUBCASE("blow-up demo without noise never blows up") {
    ExperimentConfig c = default_config(ExperimentKind::BlowupDemo);
    c.solver.n_modes = 8;
    c.solver.T = 1.0;
    c.solver.noise.epsilon = 0.0;
    c.realizations = 2;
    const auto r = run_blowup(c);
    CHECK(r.additive_blowups == 0);
    CHECK(r.nemytskii_blowups == 0);
  }
}

TEST_CASE("run_experiment writes tables and a manifest") {
  ExperimentConfig c = default_config(ExperimentKind::Simulate);
  c.solver.n_modes = 8;
  c.solver.T = 0.05;
  c.realizations = 2;
  c.snapshot_times = {0.0, 0.05};
  c.output_dir = temp_dir("simulate").string();
  const auto manifest = run_experiment(c);
  CHECK(std::filesystem::exists(manifest));
  std::ifstream in(manifest);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["experiment"] == "simulate");
  CHECK(j["config"]["realizations"] == 2);
  CHECK(j["version"].get<std::string>().rfind("0.1.0", 0) == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / "diagnostics_mean.csv"));
  CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / "snapshots" / "realization0_t0.050.bin"));
  CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / "snapshots" / "realization0_t0.050.json"));
}

#ifdef LOGSAC_CLI
TEST_CASE("CLI exit codes") {
  const auto dir = temp_dir("cli");
  std::filesystem::create_directories(dir);
  const std::string cli = LOGSAC_CLI;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("simulate -N 8 -T 0.02 -M 2 -o " + (dir / "ok").string()) == 0);
  CHECK(std::filesystem::exists(dir / "ok" / "manifest.json"));
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"experiment": "simulate", "tau": 0.03, "T": 0.1})";
  }
  CHECK(run("simulate -c " + (dir / "bad.json").string()) == 2);
  CHECK(run("converge -c " + (dir / "bad.json").string()) == 2);
  CHECK(run("simulate --no-such-flag") == 2);
  // alpha = 0 with tau = 1 makes the implicit denominator 1 - 3 < 0.
  {
    std::ofstream bad(dir / "degenerate.json");
    bad << R"({"experiment": "simulate", "tau": 0.5, "T": 1, "alpha": 0})";
  }
  CHECK(run("simulate -c " + (dir / "degenerate.json").string()) == 2);
  {
    std::ofstream nan(dir / "nan.json");
    nan << R"j({"experiment": "simulate", "n_modes": 8, "T": 0.01, "realizations": 2, "initial_condition": "sqrt(x - 5)"})j";
  }
  CHECK(run("simulate -c " + (dir / "nan.json").string() + " -o " + (dir / "nan").string()) == 3);
  CHECK(run("--version") == 0);
}
#endif
