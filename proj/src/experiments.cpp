#include "logsac/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "logsac/ensemble.hpp"
#include "logsac/initial_condition.hpp"
#include "logsac/snapshot.hpp"

namespace logsac {

using nlohmann::json;

std::vector<MeanDiagnosticsRow> average_diagnostics(const std::vector<TrajectoryRecord>& records) {
  std::size_t longest = 0;
  for (const auto& r : records) longest = std::max(longest, r.diagnostics.size());
  std::vector<MeanDiagnosticsRow> out;
  for (std::size_t k = 0; k < longest; ++k) {
    MeanDiagnosticsRow row;
    double sum_sq = 0.0;
    bool have_time = false;
    for (const auto& r : records) {
      if (k >= r.diagnostics.size() || r.diagnostics[k].blown_up) continue;
      const DiagnosticsRow& d = r.diagnostics[k];
      if (!have_time) {
        row.time = d.time;
        have_time = true;
      }
      ++row.count;
      row.energy += d.energy;
      sum_sq += d.energy * d.energy;
      row.sup_norm += d.sup_norm;
      row.max_sup_norm = std::max(row.max_sup_norm, d.sup_norm);
      row.tail_upper += d.tail_upper;
      row.tail_lower += d.tail_lower;
      row.violation_measure += d.violation_measure;
    }
    if (row.count == 0) continue;
    const double n = static_cast<double>(row.count);
    row.energy /= n;
    row.sup_norm /= n;
    row.tail_upper /= n;
    row.tail_lower /= n;
    row.violation_measure /= n;
    if (row.count > 1) {
      const double var = std::max(0.0, (sum_sq - n * row.energy * row.energy) / (n - 1.0));
      row.energy_stderr = std::sqrt(var / n);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<RealizationSummary> summarize_realizations(const std::vector<TrajectoryRecord>& records) {
  std::vector<RealizationSummary> out;
  out.reserve(records.size());
  for (std::size_t m = 0; m < records.size(); ++m) {
    const auto& r = records[m];
    out.push_back({m, r.seed, r.blown_up, r.blowup_time, r.max_sup_norm});
  }
  return out;
}

namespace {

double resolved_delta0(const ExperimentConfig& cfg) {
  return cfg.delta0 < 0.0 ? cfg.solver.potential.delta : cfg.delta0;
}

TrajectoryOptions trajectory_options(const ExperimentConfig& cfg) {
  TrajectoryOptions o;
  for (double t : cfg.snapshot_times) {
    if (t <= cfg.solver.T + 1e-12) o.snapshot_times.push_back(t);
  }
  o.record_every = cfg.record_every;
  o.delta0 = cfg.delta0;
  return o;
}

std::vector<double> energy_column(const std::vector<MeanDiagnosticsRow>& rows) {
  std::vector<double> e;
  e.reserve(rows.size());
  for (const auto& r : rows) e.push_back(r.energy);
  return e;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  // Series of different lengths (an early blow-up) are infinitely apart.
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  SimulateResult res;
  res.records = run_ensemble(u0, cfg.solver, cfg.realizations, trajectory_options(cfg), cfg.threads);
  res.mean = average_diagnostics(res.records);
  res.realizations = summarize_realizations(res.records);
  if (res.records.size() >= 2) res.violation = bound_violation_probability(res.records, resolved_delta0(cfg));
  return res;
}

ConvergeResult run_converge(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  ConvergeResult res;
  res.errors = strong_errors(u0, cfg.solver, cfg.tau_ladder, cfg.tau_ref, cfg.realizations, cfg.threads);
  try {
    res.fit = estimate_order(res.errors);
    res.fit_valid = true;
  } catch (const std::invalid_argument&) {
    res.fit_valid = false;
  }
  return res;
}

EnergyScanResult run_energy_scan(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  EnergyScanResult res;
  res.deltas = cfg.delta_ladder;
  TrajectoryOptions opts = trajectory_options(cfg);
  opts.snapshot_times.clear();
  for (double delta : cfg.delta_ladder) {
    SolverConfig s = cfg.solver;
    s.potential.delta = delta;
    // Same base seed for every delta: realization m sees the same noise path.
    const auto records = run_ensemble(u0, s, cfg.realizations, opts, cfg.threads);
    const auto mean = average_diagnostics(records);
    std::size_t blown = 0;
    for (const auto& r : records) blown += r.blown_up ? 1 : 0;
    if (res.times.empty()) {
      for (const auto& row : mean) res.times.push_back(row.time);
    }
    std::vector<double> se;
    for (const auto& row : mean) se.push_back(row.energy_stderr);
    res.mean_energy.push_back(energy_column(mean));
    res.energy_stderr.push_back(std::move(se));
    res.blown_up.push_back(blown);
  }
  for (std::size_t k = 0; k + 1 < res.mean_energy.size(); ++k) {
    res.gaps.push_back(max_abs_difference(res.mean_energy[k], res.mean_energy[k + 1]));
  }
  return res;
}

CoarsenResult run_coarsen(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  CoarsenResult res;
  res.epsilons = cfg.epsilon_ladder;
  const TrajectoryOptions opts = trajectory_options(cfg);

  SolverConfig det = cfg.solver;
  det.noise.epsilon = 0.0;
  det.scheme = Scheme::DeterministicEtdrk2;
  const TrajectoryRecord det_rec = run_trajectory(u0, det, opts);
  for (const auto& d : det_rec.diagnostics) {
    res.times.push_back(d.time);
    res.deterministic_energy.push_back(d.blown_up ? std::numeric_limits<double>::infinity() : d.energy);
  }
  res.deterministic_snapshots = det_rec.snapshots;

  for (double eps : cfg.epsilon_ladder) {
    SolverConfig s = cfg.solver;
    s.scheme = Scheme::StabilizedSemiImplicit;
    s.noise.epsilon = eps;
    auto records = run_ensemble(u0, s, cfg.realizations, opts, cfg.threads);
    bool blown = false;
    for (const auto& r : records) blown = blown || r.blown_up;
    res.energy.push_back(energy_column(average_diagnostics(records)));
    res.max_deviation.push_back(max_abs_difference(res.energy.back(), res.deterministic_energy));
    res.snapshots.push_back(std::move(records.front().snapshots));
    res.blown_up.push_back(blown);
  }
  return res;
}

BlowupResult run_blowup(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  TrajectoryOptions opts = trajectory_options(cfg);
  opts.snapshot_times.clear();

  BlowupResult res;
  SolverConfig additive = cfg.solver;
  additive.noise = NoiseSpec::additive(cfg.solver.noise.epsilon);
  res.additive = summarize_realizations(run_ensemble(u0, additive, cfg.realizations, opts, cfg.threads));

  SolverConfig bounded = cfg.solver;
  bounded.noise = NoiseSpec::nemytskii(cfg.solver.noise.epsilon);
  res.nemytskii = summarize_realizations(run_ensemble(u0, bounded, cfg.realizations, opts, cfg.threads));

  for (const auto& r : res.additive) res.additive_blowups += r.blown_up ? 1 : 0;
  for (const auto& r : res.nemytskii) {
    res.nemytskii_blowups += r.blown_up ? 1 : 0;
    res.nemytskii_max_sup = std::max(res.nemytskii_max_sup, r.max_sup_norm);
  }
  return res;
}

std::vector<double> energy_law_realization(const Field& u0, const SolverConfig& cfg, const NoisePath& path,
                                           const EnergyLawEvaluator& evaluator) {
  EnergyLawAccumulator acc(evaluator, cfg.tau);
  std::vector<double> r;
  r.reserve(cfg.steps() + 1);
  TrajectoryOptions opts;
  opts.record_every = cfg.steps();
  opts.observer = [&](std::size_t, const Field& u) { r.push_back(acc.add(u)); };
  run_trajectory(u0, cfg, path, opts);
  return r;
}

EnergyLawResult run_energy_law(const ExperimentConfig& cfg) {
  const BasisPtr basis = cfg.make_basis();
  const Field u0 = initial_condition(cfg.initial_condition, basis);
  EnergyLawResult res;
  res.taus = cfg.tau_ladder;
  if (res.taus.empty()) res.taus = {cfg.solver.tau, cfg.solver.tau / 2.0};
  if (res.taus.size() != 2) throw ConfigError("energy-law needs a tau_ladder of exactly two step sizes");
  const double fine = res.taus.back();

  std::vector<SolverConfig> level_cfg;
  std::vector<std::unique_ptr<EnergyLawEvaluator>> evaluators;
  for (double tau : res.taus) {
    SolverConfig s = cfg.solver;
    s.tau = tau;
    s.validate(*basis);
    level_cfg.push_back(s);
    evaluators.push_back(std::make_unique<EnergyLawEvaluator>(basis, s));
  }
  const std::size_t coarse_steps = level_cfg.front().steps();
  SolverConfig fine_cfg = cfg.solver;
  fine_cfg.tau = fine;
  const std::size_t fine_steps = fine_cfg.steps();

  u0.values();
  u0.spectrum();
  // [realization][level] residual series on the coarse grid; empty on blow-up.
  const auto per = parallel_map<std::vector<std::vector<double>>>(
      cfg.realizations,
      [&](std::size_t m) {
        const std::uint64_t seed = realization_seed(cfg.solver.seed, m);
        NoisePath path(basis, seed, fine, fine_steps);
        std::vector<std::vector<double>> out;
        for (std::size_t k = 0; k < level_cfg.size(); ++k) {
          const auto full = energy_law_realization(u0, level_cfg[k], path, *evaluators[k]);
          const std::size_t stride = (full.size() - 1) / coarse_steps;
          if (full.size() != level_cfg[k].steps() + 1 || stride * coarse_steps + 1 != full.size()) return decltype(out){};
          std::vector<double> coarse(coarse_steps + 1);
          for (std::size_t j = 0; j <= coarse_steps; ++j) coarse[j] = full[j * stride];
          out.push_back(std::move(coarse));
        }
        return out;
      },
      cfg.threads);

  std::vector<double> times(coarse_steps + 1);
  for (std::size_t j = 0; j <= coarse_steps; ++j) times[j] = static_cast<double>(j) * res.taus.front();
  for (std::size_t k = 0; k < res.taus.size(); ++k) {
    std::vector<std::vector<double>> series;
    for (const auto& p : per) {
      if (!p.empty()) series.push_back(p[k]);
    }
    if (series.empty()) throw NumericalFailure("energy law: every realization blew up");
    res.series.push_back(summarize_residuals(times, series));
  }
  for (const auto& p : per) res.blown_up += p.empty() ? 1 : 0;

  const double t0 = res.taus[0], t1 = res.taus[1];
  for (std::size_t j = 0; j <= coarse_steps; ++j) {
    const double r0 = res.series[0].residual[j], r1 = res.series[1].residual[j];
    res.rate_constant.push_back((r0 - r1) / (t0 - t1));
    res.extrapolated.push_back(r1 + (r1 - r0) * t1 / (t0 - t1));
  }
  return res;
}

// ---------------------------------------------------------------------------

namespace {

std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << std::setprecision(17);
  return os;
}

std::string time_tag(double t) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << t;
  return s.str();
}

std::string number_tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void write_snapshots(const std::filesystem::path& dir, const std::string& prefix, const std::vector<Snapshot>& snaps,
                     std::uint64_t seed, json& files) {
  std::filesystem::create_directories(dir);
  for (const auto& s : snaps) {
    const auto stem = dir / (prefix + "_t" + time_tag(s.time));
    write_snapshot(stem, s.field, SnapshotMeta{s.time, seed});
    files.push_back(std::filesystem::relative(stem, dir.parent_path()).string() + ".bin");
  }
}

void write_mean_csv(const std::filesystem::path& p, const std::vector<MeanDiagnosticsRow>& rows) {
  auto os = open_csv(p);
  os << "time,count,energy,energy_stderr,sup_norm,max_sup_norm,tail_upper,tail_lower,violation_measure\n";
  for (const auto& r : rows) {
    os << r.time << ',' << r.count << ',' << r.energy << ',' << r.energy_stderr << ',' << r.sup_norm << ','
       << r.max_sup_norm << ',' << r.tail_upper << ',' << r.tail_lower << ',' << r.violation_measure << '\n';
  }
}

void write_realizations_csv(std::ostream& os, const std::string& label, const std::vector<RealizationSummary>& rows) {
  for (const auto& r : rows) {
    if (!label.empty()) os << label << ',';
    os << r.realization << ',' << r.seed << ',' << (r.blown_up ? 1 : 0) << ',' << r.blowup_time << ','
       << r.max_sup_norm << '\n';
  }
}

json proportion_json(const ProportionEstimate& p) {
  return {{"estimate", p.estimate}, {"lower", p.lower}, {"upper", p.upper}, {"hits", p.hits}, {"trials", p.trials}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::filesystem::path run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  json files = json::array();
  json summary = json::object();

  try {
    switch (cfg.experiment) {
      case ExperimentKind::Simulate: {
        const auto res = run_simulate(cfg);
        write_mean_csv(dir / "diagnostics_mean.csv", res.mean);
        files.push_back("diagnostics_mean.csv");
        {
          auto os = open_csv(dir / "realizations.csv");
          os << "realization,seed,blown_up,blowup_time,max_sup_norm\n";
          write_realizations_csv(os, "", res.realizations);
          files.push_back("realizations.csv");
        }
        {
          auto os = open_csv(dir / "diagnostics_realization0.csv");
          write_diagnostics_csv(os, res.records.front().diagnostics);
          files.push_back("diagnostics_realization0.csv");
        }
        write_snapshots(dir / "snapshots", "realization0", res.records.front().snapshots, res.records.front().seed,
                        files);
        std::size_t blown = 0;
        for (const auto& r : res.realizations) blown += r.blown_up ? 1 : 0;
        summary["blown_up"] = blown;
        if (res.violation.trials > 0) summary["bound_violation_probability"] = proportion_json(res.violation);
        break;
      }
      case ExperimentKind::Converge: {
        const auto res = run_converge(cfg);
        auto os = open_csv(dir / "strong_errors.csv");
        os << "tau,error,stderr,blown_up\n";
        for (const auto& e : res.errors) os << e.tau << ',' << e.error << ',' << e.stderr_ << ',' << e.blown_up << '\n';
        files.push_back("strong_errors.csv");
        if (res.fit_valid) {
          summary["slope"] = res.fit.slope;
          summary["intercept"] = res.fit.intercept;
          summary["r_squared"] = res.fit.r_squared;
        } else {
          summary["slope"] = nullptr;
        }
        summary["tau_ref"] = cfg.tau_ref;
        break;
      }
      case ExperimentKind::EnergyScan: {
        const auto res = run_energy_scan(cfg);
        auto os = open_csv(dir / "energy_scan.csv");
        os << "time";
        for (double d : res.deltas) os << ",energy_delta=" << number_tag(d) << ",stderr_delta=" << number_tag(d);
        os << '\n';
        for (std::size_t i = 0; i < res.times.size(); ++i) {
          os << res.times[i];
          for (std::size_t k = 0; k < res.deltas.size(); ++k) {
            if (i < res.mean_energy[k].size()) {
              os << ',' << res.mean_energy[k][i] << ',' << res.energy_stderr[k][i];
            } else {
              os << ",,";
            }
          }
          os << '\n';
        }
        files.push_back("energy_scan.csv");
        json gaps = json::array();
        for (double g : res.gaps) gaps.push_back(finite_or_null(g));
        summary["gaps"] = gaps;
        summary["blown_up"] = res.blown_up;
        break;
      }
      case ExperimentKind::Coarsen: {
        const auto res = run_coarsen(cfg);
        auto os = open_csv(dir / "coarsen_energy.csv");
        os << "time,deterministic";
        for (double e : res.epsilons) os << ",energy_eps=" << number_tag(e);
        os << '\n';
        for (std::size_t i = 0; i < res.times.size(); ++i) {
          os << res.times[i] << ',' << res.deterministic_energy[i];
          for (const auto& col : res.energy) {
            os << ',';
            if (i < col.size()) os << col[i];
          }
          os << '\n';
        }
        files.push_back("coarsen_energy.csv");
        write_snapshots(dir / "snapshots", "deterministic", res.deterministic_snapshots, cfg.solver.seed, files);
        json dev = json::array();
        for (std::size_t k = 0; k < res.epsilons.size(); ++k) {
          write_snapshots(dir / "snapshots", "eps" + number_tag(res.epsilons[k]), res.snapshots[k],
                          realization_seed(cfg.solver.seed, 0), files);
          dev.push_back({{"epsilon", res.epsilons[k]},
                         {"max_energy_deviation", finite_or_null(res.max_deviation[k])},
                         {"blown_up", static_cast<bool>(res.blown_up[k])}});
        }
        summary["deviation_from_deterministic"] = dev;
        break;
      }
      case ExperimentKind::BlowupDemo: {
        const auto res = run_blowup(cfg);
        auto os = open_csv(dir / "blowup.csv");
        os << "noise_case,realization,seed,blown_up,blowup_time,max_sup_norm\n";
        write_realizations_csv(os, "additive", res.additive);
        write_realizations_csv(os, "nemytskii", res.nemytskii);
        files.push_back("blowup.csv");
        summary["additive_blowups"] = res.additive_blowups;
        summary["nemytskii_blowups"] = res.nemytskii_blowups;
        summary["nemytskii_max_sup_norm"] = finite_or_null(res.nemytskii_max_sup);
        summary["nemytskii_bounded"] =
            res.nemytskii_blowups == 0 && res.nemytskii_max_sup <= 1.0 + cfg.case2_slack;
        break;
      }
      case ExperimentKind::EnergyLaw: {
        const auto res = run_energy_law(cfg);
        auto os = open_csv(dir / "energy_law.csv");
        os << "time,residual,stderr,residual_half_step,stderr_half_step,rate_constant,extrapolated\n";
        const auto& a = res.series[0];
        const auto& b = res.series[1];
        for (std::size_t j = 0; j < a.times.size(); ++j) {
          os << a.times[j] << ',' << a.residual[j] << ',' << a.stderr_[j] << ',' << b.residual[j] << ','
             << b.stderr_[j] << ',' << res.rate_constant[j] << ',' << res.extrapolated[j] << '\n';
        }
        files.push_back("energy_law.csv");
        summary["taus"] = res.taus;
        summary["blown_up"] = res.blown_up;
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericalFailure&) {
    throw;
  } catch (const DegenerateDenominator& e) {
    throw NumericalFailure(e.what());
  } catch (const SolverError& e) {
    throw NumericalFailure(e.what());
  } catch (const std::domain_error& e) {
    throw NumericalFailure(e.what());
  }

  json manifest;
  manifest["version"] = version();
  manifest["experiment"] = to_string(cfg.experiment);
  manifest["config"] = json::parse(config_to_json_text(cfg));
  manifest["outputs"] = files;
  manifest["summary"] = summary;
  const auto path = dir / "manifest.json";
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << manifest.dump(2) << '\n';
  return path;
}

}  // namespace logsac
