#include "logsac/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "logsac/initial_condition.hpp"

namespace logsac {

using nlohmann::json;

const char* version() { return LOGSAC_VERSION; }

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Converge: return "converge";
    case ExperimentKind::EnergyScan: return "energy-scan";
    case ExperimentKind::Coarsen: return "coarsen";
    case ExperimentKind::BlowupDemo: return "blowup-demo";
    case ExperimentKind::EnergyLaw: return "energy-law";
  }
  return "simulate";
}

ExperimentKind experiment_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::Simulate, ExperimentKind::Converge, ExperimentKind::EnergyScan,
                 ExperimentKind::Coarsen, ExperimentKind::BlowupDemo, ExperimentKind::EnergyLaw}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

bool integer_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::round(r)) && std::round(r) >= 1.0;
}

}  // namespace

BasisPtr ExperimentConfig::make_basis() const { return SpectralBasis::create(boundary, solver.n_modes, dealias); }

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(solver.n_modes >= 2, "n_modes must be >= 2");
  require(boundary != Boundary::Periodic || solver.n_modes % 2 == 0, "periodic n_modes must be even");
  require(realizations >= 1, "realizations must be >= 1");
  require(record_every >= 1, "record_every must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  require(std::is_sorted(delta_ladder.begin(), delta_ladder.end(), std::greater<>()),
          "delta_ladder must be sorted in decreasing order");
  require(std::is_sorted(epsilon_ladder.begin(), epsilon_ladder.end()),
          "epsilon_ladder must be sorted in increasing order");
  require(std::is_sorted(tau_ladder.begin(), tau_ladder.end(), std::greater<>()),
          "tau_ladder must be sorted in decreasing order");

  try {
    parse_expression(resolve_initial_condition(initial_condition));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("initial_condition: ") + e.what());
  }

  SolverConfig check = solver;
  if (experiment == ExperimentKind::EnergyScan) {
    require(!delta_ladder.empty(), "energy-scan needs a delta_ladder");
    check.potential.delta = delta_ladder.back();
  }
  if (experiment == ExperimentKind::Coarsen) require(!epsilon_ladder.empty(), "coarsen needs an epsilon_ladder");
  if (experiment == ExperimentKind::Converge) {
    require(tau_ladder.size() >= 3, "converge needs at least three tau_ladder entries");
    require(tau_ref > 0.0, "converge needs tau_ref > 0");
    for (double t : tau_ladder) {
      require(integer_multiple(t, tau_ref), "tau_ladder entries must be integer multiples of tau_ref");
    }
    check.tau = tau_ref;
  }
  if (experiment == ExperimentKind::EnergyLaw) {
    require(realizations >= 2, "energy-law needs at least two realizations");
  }
  if (experiment == ExperimentKind::BlowupDemo) require(realizations >= 2, "blowup-demo needs >= 2 realizations");

  try {
    const BasisPtr basis = make_basis();
    check.validate(*basis);
    for (double d : delta_ladder) {
      check.potential.delta = d;
      check.validate(*basis);
    }
    check.potential.delta = experiment == ExperimentKind::EnergyScan ? delta_ladder.back() : solver.potential.delta;
    for (double t : tau_ladder) {
      check.tau = t;
      check.validate(*basis);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.solver.n_modes = 32;
  c.solver.sigma = 1.0;
  c.solver.alpha = 2.0;
  c.solver.potential = {1e-18, 1.5};
  c.solver.noise = NoiseSpec::nemytskii(1.0);
  c.solver.tau = 1e-3;
  c.output_dir = "out/" + to_string(kind);
  switch (kind) {
    case ExperimentKind::Simulate:
      c.solver.T = 10.0;
      c.initial_condition = "fig1";
      c.record_every = 10;
      break;
    case ExperimentKind::Converge:
      c.solver.potential.delta = 1e-4;
      c.solver.T = 0.096;
      c.tau_ladder = {8e-3, 4e-3, 2e-3, 1e-3, 5e-4};
      c.tau_ref = 6.25e-5;
      c.initial_condition = "fig3";
      break;
    case ExperimentKind::EnergyScan:
      c.solver.sigma = 0.1;
      c.solver.noise = NoiseSpec::nemytskii(1e-4);
      c.solver.tau = 1e-2;
      c.solver.T = 20.0;
      c.realizations = 50;
      c.delta_ladder = {1e-2, 1e-4, 1e-8, 1e-12};
      c.initial_condition = "fig4";
      break;
    case ExperimentKind::Coarsen:
      c.boundary = Boundary::Periodic;
      c.solver.n_modes = 64;
      c.solver.sigma = 0.01;
      c.solver.T = 20.0;
      c.realizations = 1;
      c.epsilon_ladder = {0.0, 1e-10, 1e-2};
      c.snapshot_times = {5, 20, 40, 60, 100, 200, 500};
      c.initial_condition = "fig5";
      c.record_every = 10;
      break;
    case ExperimentKind::BlowupDemo:
      c.solver.noise = NoiseSpec::additive(1.0);
      c.solver.T = 50.0;
      c.realizations = 10;
      c.initial_condition = "fig1";
      c.record_every = 100;
      break;
    case ExperimentKind::EnergyLaw:
      c.solver.n_modes = 16;
      c.solver.potential.delta = 1e-2;
      c.solver.noise = NoiseSpec::nemytskii(0.1);
      c.solver.T = 0.5;
      c.realizations = 500;
      c.tau_ladder = {1e-3, 5e-4};
      c.initial_condition = "fig1";
      break;
  }
  return c;
}

namespace {

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "experiment", "boundary",      "n_modes",         "dealias",       "sigma",       "tau",
      "T",          "alpha",         "delta",           "c",             "noise_case",  "epsilon",
      "scheme",     "seed",          "blowup_threshold", "realizations", "tau_ladder",  "tau_ref",
      "delta_ladder", "epsilon_ladder", "initial_condition", "output_dir", "snapshot_times", "record_every",
      "delta0",     "case2_slack",   "threads",         "version"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }

  ExperimentConfig c = default_config(
      j.contains("experiment") ? experiment_from_string(get<std::string>(j, "experiment")) : ExperimentKind::Simulate);
  try {
    if (j.contains("boundary")) c.boundary = boundary_from_string(get<std::string>(j, "boundary"));
    if (j.contains("scheme")) c.solver.scheme = scheme_from_string(get<std::string>(j, "scheme"));
    if (j.contains("noise_case")) c.solver.noise.kind = noise_case_from_string(get<std::string>(j, "noise_case"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("n_modes")) c.solver.n_modes = get<int>(j, "n_modes");
  if (j.contains("dealias")) c.dealias = get<bool>(j, "dealias");
  if (j.contains("sigma")) c.solver.sigma = get<double>(j, "sigma");
  if (j.contains("tau")) c.solver.tau = get<double>(j, "tau");
  if (j.contains("T")) c.solver.T = get<double>(j, "T");
  if (j.contains("alpha")) c.solver.alpha = get<double>(j, "alpha");
  if (j.contains("delta")) c.solver.potential.delta = get<double>(j, "delta");
  if (j.contains("c")) c.solver.potential.c = get<double>(j, "c");
  if (j.contains("epsilon")) c.solver.noise.epsilon = get<double>(j, "epsilon");
  if (j.contains("seed")) c.solver.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("blowup_threshold")) c.solver.blowup_threshold = get<double>(j, "blowup_threshold");
  if (j.contains("realizations")) c.realizations = get<std::size_t>(j, "realizations");
  if (j.contains("tau_ladder")) c.tau_ladder = get<std::vector<double>>(j, "tau_ladder");
  if (j.contains("tau_ref")) c.tau_ref = get<double>(j, "tau_ref");
  if (j.contains("delta_ladder")) c.delta_ladder = get<std::vector<double>>(j, "delta_ladder");
  if (j.contains("epsilon_ladder")) c.epsilon_ladder = get<std::vector<double>>(j, "epsilon_ladder");
  if (j.contains("initial_condition")) c.initial_condition = get<std::string>(j, "initial_condition");
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir");
  if (j.contains("snapshot_times")) c.snapshot_times = get<std::vector<double>>(j, "snapshot_times");
  if (j.contains("record_every")) c.record_every = get<std::size_t>(j, "record_every");
  if (j.contains("delta0")) c.delta0 = get<double>(j, "delta0");
  if (j.contains("case2_slack")) c.case2_slack = get<double>(j, "case2_slack");
  if (j.contains("threads")) c.threads = get<unsigned>(j, "threads");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& c, int indent) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["boundary"] = to_string(c.boundary);
  j["n_modes"] = c.solver.n_modes;
  j["dealias"] = c.dealias;
  j["sigma"] = c.solver.sigma;
  j["tau"] = c.solver.tau;
  j["T"] = c.solver.T;
  j["alpha"] = c.solver.alpha;
  j["delta"] = c.solver.potential.delta;
  j["c"] = c.solver.potential.c;
  j["noise_case"] = to_string(c.solver.noise.kind);
  j["epsilon"] = c.solver.noise.epsilon;
  j["scheme"] = to_string(c.solver.scheme);
  j["seed"] = c.solver.seed;
  j["blowup_threshold"] = c.solver.blowup_threshold;
  j["realizations"] = c.realizations;
  j["tau_ladder"] = c.tau_ladder;
  j["tau_ref"] = c.tau_ref;
  j["delta_ladder"] = c.delta_ladder;
  j["epsilon_ladder"] = c.epsilon_ladder;
  j["initial_condition"] = c.initial_condition;
  j["output_dir"] = c.output_dir;
  j["snapshot_times"] = c.snapshot_times;
  j["record_every"] = c.record_every;
  j["delta0"] = c.delta0;
  j["case2_slack"] = c.case2_slack;
  j["threads"] = c.threads;
  return j.dump(indent);
}

}  // namespace logsac
