#include "attnflow/report_io.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/experiments.hpp"
#include "attnflow/geometry.hpp"
#include "attnflow/parallel.hpp"

namespace attnflow {

using nlohmann::json;

#define ATTNFLOW_CONFIG_FIELDS(X)                                                              \
  X(experiment) X(betas) X(beta) X(dim) X(n) X(n_list) X(grid) X(dt) X(horizon) X(seeds)     \
  X(replicas) X(seed_base) X(delta) X(deltas) X(noise_sigma) X(tv_threshold) X(tv_thresholds) \
  X(tv_bins) X(exit_check_interval) X(gap_factor) X(min_mass) X(check_rates)                 \
  X(persistence_rates) X(t_check) X(t_checks) X(pairs) X(pair_times) X(perturbation)         \
  X(two_particle_eps) X(t3_max) X(t3_plateau) X(full_scale) X(workers) X(output_dir)

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int r = 0; r < replicas; ++r) out.push_back(seed_base + static_cast<std::uint64_t>(r));
  return out;
}

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string("config: ") + what + " must be positive");
  };
  if (dim != 2) throw Error("config: experiments run on the circle (dim = 2)");
  positive(beta, "beta");
  for (double b : betas) positive(b, "betas");
  if (n < 2) throw Error("config: n must be at least 2");
  for (auto v : n_list) {
    if (v < 2) throw Error("config: n_list entries must be at least 2");
  }
  if (grid < 64) throw Error("config: grid must be at least 64");
  positive(dt, "dt");
  if (horizon < 0.0) throw Error("config: horizon must be nonnegative");
  if (seeds.empty() && replicas < 1) throw Error("config: seeds must be nonempty");
  positive(delta, "delta");
  for (double d : deltas) positive(d, "deltas");
  if (noise_sigma < 0.0) throw Error("config: noise_sigma must be nonnegative");
  positive(tv_threshold, "tv_threshold");
  for (double d : tv_thresholds) positive(d, "tv_thresholds");
  if (tv_bins < 2) throw Error("config: tv_bins must be at least 2");
  positive(exit_check_interval, "exit_check_interval");
  positive(gap_factor, "gap_factor");
  if (min_mass < 0.0 || min_mass > 1.0) throw Error("config: min_mass must lie in [0, 1]");
  positive(check_rates, "check_rates");
  positive(persistence_rates, "persistence_rates");
  if (t_check < 0.0) throw Error("config: t_check must be nonnegative");
  for (double t : t_checks) {
    if (t < 0.0) throw Error("config: t_checks must be nonnegative");
  }
  if (pairs < 1) throw Error("config: pairs must be positive");
  if (pair_times.empty()) throw Error("config: pair_times must be nonempty");
  for (double t : pair_times) positive(t, "pair_times");
  positive(perturbation, "perturbation");
  positive(two_particle_eps, "two_particle_eps");
  positive(t3_max, "t3_max");
  positive(t3_plateau, "t3_plateau");
}

ExperimentConfig default_config(const std::string& name, bool full_scale) {
  ExperimentConfig c;
  c.experiment = name;
  c.full_scale = full_scale;
  if (name == "clusters") {
    c.replicas = 20;
    c.horizon = 30.0;
  } else if (name == "pde") {
    c.beta = 5.0;
    c.replicas = 10;
    c.horizon = 10.0;
  } else if (name == "exit_time") {
    c.beta = 2.0;
    c.n_list = {1000, 2000, 4000, 8000, 16000};
    c.replicas = 20;
    c.horizon = 30.0;
  } else if (name == "meanfield") {
    c.beta = 2.0;
    c.n_list = {500, 1000, 2000, 4000};
    c.replicas = 10;
  } else if (name == "metastability") {
    c.beta = 5.0;
    c.n_list = {2000, 4000, 8000, 16000};
    c.replicas = 3;
  } else if (name == "dobrushin") {
    c.beta = 1.0;
    c.n = 200;
  } else {
    throw Error("unknown experiment '" + name + "'");
  }
  if (full_scale) {
    if (name != "dobrushin" && name != "exit_time") c.n = 10000;
    c.grid = 10000;
  }
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error("config: expected a JSON object");
  if (!j.contains("experiment")) throw Error("config: missing 'experiment'");
  ExperimentConfig c = default_config(j.at("experiment").get<std::string>(),
                                      j.value("full_scale", false));
  static const std::vector<std::string> known = {
#define X(f) #f,
      ATTNFLOW_CONFIG_FIELDS(X)
#undef X
  };
  for (const auto& item : j.items()) {
    if (item.key() == "resolved_seeds") continue;  // written by to_json
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw Error("config: unknown key '" + item.key() + "'");
    }
  }
  try {
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(c.f);
    ATTNFLOW_CONFIG_FIELDS(X)
#undef X
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
#define X(f) j[#f] = c.f;
  ATTNFLOW_CONFIG_FIELDS(X)
#undef X
  j["resolved_seeds"] = c.seed_list();
  return j;
}

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double opt(const std::optional<double>& v) { return v ? *v : kNaN; }
double opt(const std::optional<int>& v) { return v ? static_cast<double>(*v) : -1.0; }

json fit_json(const LinearFit& f) {
  return {{"slope", f.slope},       {"intercept", f.intercept},       {"r2", f.r2},
          {"slope_stderr", f.slope_stderr}, {"slope_ci95", {f.slope_ci_low, f.slope_ci_high}},
          {"points", f.points}};
}

ExperimentReport base_report(const std::string& name, const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.name = name;
  r.config = to_json(cfg);
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ExperimentReport make_report(const ExperimentConfig& cfg, const std::vector<ClusterBetaResult>& res) {
  auto rep = base_report("clusters", cfg);
  CsvTable runs{"cluster_runs", {"beta", "seed", "plateau_count", "plateau_time", "plateau_reached", "k_max"}, {}};
  CsvTable modes{"cluster_checks", {"beta", "seed", "time", "count", "dominant_mode"}, {}};
  CsvTable hist{"fig2_histograms", {"beta", "seed", "bin", "bin_center", "count"}, {}};
  CsvTable path{"fig2_trajectories", {"beta", "seed", "time", "particle", "theta"}, {}};
  json per_beta = json::array();
  for (const auto& b : res) {
    json e = {{"beta", b.beta}, {"skipped", b.skipped}};
    if (b.skipped) {
      e["notice"] = b.notice;
      per_beta.push_back(e);
      continue;
    }
    e["k_max"] = b.k_max;
    e["gamma_max"] = b.gamma_max;
    e["gamma_minus"] = b.gamma_minus;
    e["gamma"] = b.gamma;
    e["matches"] = b.matches;
    e["sample_size"] = b.runs.size();
    for (const auto& r : b.runs) {
      const double seed = static_cast<double>(r.seed);
      runs.rows.push_back({b.beta, seed, opt(r.plateau_count), r.plateau_time,
                           r.plateau_reached ? 1.0 : 0.0, static_cast<double>(b.k_max)});
      for (std::size_t i = 0; i < r.check_times.size(); ++i) {
        modes.rows.push_back({b.beta, seed, r.check_times[i], opt(r.counts[i]),
                              static_cast<double>(r.dominant_modes[i])});
      }
      json rec = {{"beta", b.beta}, {"seed", r.seed}, {"plateau_time", r.plateau_time},
                  {"plateau_reached", r.plateau_reached}};
      rec["plateau_count"] = r.plateau_count ? json(*r.plateau_count) : json(nullptr);
      rep.records.push_back(rec);
    }
    if (!b.runs.empty()) {
      const auto& r0 = b.runs.front();
      const int bins = cfg.tv_bins;
      const auto h = histogram(EmpiricalMeasure(r0.final_angles), bins);
      for (int i = 0; i < bins; ++i) {
        hist.rows.push_back({b.beta, static_cast<double>(r0.seed), static_cast<double>(i),
                             (i + 0.5) * kTwoPi / bins, static_cast<double>(h.counts[i])});
      }
      for (const auto& [t, angles] : r0.sample_path) {
        for (std::size_t p = 0; p < angles.size(); ++p) {
          path.rows.push_back({b.beta, static_cast<double>(r0.seed), t, static_cast<double>(p), angles[p]});
        }
      }
    }
    per_beta.push_back(e);
  }
  rep.aggregate["betas"] = per_beta;
  rep.tables = {runs, modes, hist, path};
  return rep;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const PdeExperimentResult& res) {
  auto rep = base_report("pde", cfg);
  std::vector<double> deltas = cfg.deltas;
  if (std::find(deltas.begin(), deltas.end(), cfg.delta) == deltas.end()) deltas.push_back(cfg.delta);
  CsvTable runs{"pde_runs", {"seed", "exit_time", "dominant_mode", "off_mode_ratio", "clip_events"}, {}};
  for (double d : deltas) {
    runs.header.push_back("exit_time_delta_" + format_double(d));
    runs.header.push_back("dominant_delta_" + format_double(d));
  }
  CsvTable amps{"pde_mode_amplitudes", {"seed", "k", "amplitude"}, {}};
  CsvTable fig{"fig3_density", {"time", "cell", "theta", "density"}, {}};
  json sens = json::array();
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    int exited = 0, matches = 0;
    for (const auto& r : res.runs) {
      exited += r.sensitivity_times[j].has_value();
      matches += (r.sensitivity_times[j] && r.sensitivity_modes[j] == res.k_max);
    }
    sens.push_back({{"delta", deltas[j]}, {"exited", exited}, {"dominant_matches", matches},
                    {"sample_size", res.runs.size()}});
  }
  for (const auto& r : res.runs) {
    std::vector<double> row{static_cast<double>(r.seed), opt(r.exit_time),
                            static_cast<double>(r.dominant_mode), r.off_mode_ratio,
                            static_cast<double>(r.clip_events)};
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      row.push_back(opt(r.sensitivity_times[j]));
      row.push_back(r.sensitivity_modes[j]);
    }
    runs.rows.push_back(row);
    for (std::size_t k = 0; k < r.mode_amplitudes.size(); ++k) {
      amps.rows.push_back({static_cast<double>(r.seed), static_cast<double>(k + 1), r.mode_amplitudes[k]});
    }
    json rec = {{"seed", r.seed}, {"dominant_mode", r.dominant_mode},
                {"off_mode_ratio", r.off_mode_ratio}, {"clip_events", r.clip_events},
                {"mode_amplitudes", r.mode_amplitudes}};
    rec["exit_time"] = r.exit_time ? json(*r.exit_time) : json(nullptr);
    rep.records.push_back(rec);
  }
  const PeriodicGrid grid(cfg.grid);
  for (const auto& [t, values] : res.figure) {
    for (std::size_t m = 0; m < values.size(); ++m) {
      fig.rows.push_back({t, static_cast<double>(m), grid.node(static_cast<int>(m)), values[m]});
    }
  }
  rep.aggregate = {{"k_max", res.k_max}, {"dominant_matches", res.dominant_matches},
                   {"off_mode_ok", res.off_mode_ok}, {"sample_size", res.runs.size()},
                   {"delta_sensitivity", sens}};
  rep.tables = {runs, amps, fig};
  return rep;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const ExitScalingResult& res) {
  auto rep = base_report("exit_time", cfg);
  CsvTable runs{"exit_runs", {"n", "seed"}, {}};
  for (const auto& t : res.thresholds) runs.header.push_back("exit_tv_" + format_double(t.threshold));
  for (const auto& r : res.runs) {
    std::vector<double> row{static_cast<double>(r.n), static_cast<double>(r.seed)};
    for (const auto& e : r.exit_times) row.push_back(opt(e));
    runs.rows.push_back(row);
    json rec = {{"n", r.n}, {"seed", r.seed}};
    json times = json::array();
    for (const auto& e : r.exit_times) times.push_back(e ? json(*e) : json(nullptr));
    rec["exit_times"] = times;
    rep.records.push_back(rec);
  }
  CsvTable fig{"fig4_exit_times", {"threshold", "n", "ln_n", "mean", "stddev", "exited", "replicas"}, {}};
  json th = json::array();
  const double replicas = static_cast<double>(res.runs.size() / std::max<std::size_t>(1, res.n_list.size()));
  for (const auto& s : res.thresholds) {
    for (std::size_t a = 0; a < res.n_list.size(); ++a) {
      const double n = static_cast<double>(res.n_list[a]);
      fig.rows.push_back({s.threshold, n, std::log(n), s.mean[a], s.stddev[a],
                          static_cast<double>(s.exited[a]), replicas});
    }
    th.push_back({{"threshold", s.threshold}, {"mean", s.mean}, {"stddev", s.stddev},
                  {"exited", s.exited}, {"fit", fit_json(s.fit)}, {"monotone", s.monotone}});
  }
  const auto& main = res.thresholds[res.main_index];
  rep.aggregate = {{"n_list", res.n_list},
                   {"replicas_per_n", replicas},
                   {"gamma_max", res.gamma_max},
                   {"predicted_slope", res.predicted_slope},
                   {"threshold", main.threshold},
                   {"fit", fit_json(main.fit)},
                   {"slope_over_prediction", main.fit.slope / res.predicted_slope},
                   {"monotone", main.monotone},
                   {"not_exited", res.not_exited},
                   {"thresholds", th}};
  rep.tables = {runs, fig};
  return rep;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const MeanFieldResult& res) {
  auto rep = base_report("meanfield", cfg);
  CsvTable byn{"meanfield_by_n", {"n", "ln_n", "mean_w1", "sd_w1", "baseline_w1"}, {}};
  for (std::size_t a = 0; a < res.n_list.size(); ++a) {
    const double n = static_cast<double>(res.n_list[a]);
    byn.rows.push_back({n, std::log(n), res.mean_w1[a], res.sd_w1[a], res.baseline_w1[a]});
  }
  std::vector<double> times = cfg.t_checks;
  std::sort(times.begin(), times.end());
  CsvTable byt{"meanfield_by_time", {"time", "mean_w1"}, {}};
  for (std::size_t k = 0; k < times.size(); ++k) byt.rows.push_back({times[k], res.time_w1[k]});
  rep.aggregate = {{"n_list", res.n_list},       {"mean_w1", res.mean_w1},
                   {"sd_w1", res.sd_w1},         {"baseline_w1", res.baseline_w1},
                   {"decreasing", res.decreasing}, {"seeds_per_n", cfg.seed_list().size()},
                   {"time_trend_n", cfg.n},      {"times", times},
                   {"time_w1", res.time_w1},     {"growing_in_time", res.growing_in_time}};
  rep.tables = {byn, byt};
  return rep;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const MetastabilityResult& res) {
  auto rep = base_report("metastability", cfg);
  CsvTable runs{"metastability_runs",
                {"n", "seed", "norm_rho0", "t1", "alpha", "t2", "phase", "t1_nonpositive",
                 "residual_ratio", "w1_to_falpha", "w1_to_uniform", "falpha_w1_to_uniform", "t3",
                 "inf_w1_cluster", "t_inf"},
                {}};
  int exceeds = 0;
  for (const auto& r : res.runs) {
    runs.rows.push_back({static_cast<double>(r.n), static_cast<double>(r.seed), r.norm_rho0, r.t1,
                         r.alpha, r.t2, r.phase, r.t1_nonpositive ? 1.0 : 0.0, r.residual_ratio,
                         r.w1_to_falpha, r.w1_to_uniform, r.falpha_w1_to_uniform, r.t3,
                         r.inf_w1_cluster, r.t_inf});
    exceeds += r.w1_to_uniform > cfg.delta;
    rep.records.push_back({{"n", r.n}, {"seed", r.seed}, {"t1", r.t1}, {"alpha", r.alpha},
                           {"t2", r.t2}, {"t1_nonpositive", r.t1_nonpositive},
                           {"t2_nonpositive", r.t2_nonpositive},
                           {"residual_ratio", r.residual_ratio}, {"w1_to_falpha", r.w1_to_falpha},
                           {"w1_to_uniform", r.w1_to_uniform},
                           {"falpha_w1_to_uniform", r.falpha_w1_to_uniform}, {"t3", r.t3},
                           {"inf_w1_cluster", r.inf_w1_cluster}, {"t_inf", r.t_inf}});
  }
  rep.aggregate = {{"k_max", res.k_max},
                   {"gamma_max", res.gamma_max},
                   {"gamma_minus", res.gamma_minus},
                   {"n_list", res.n_list},
                   {"seeds_per_n", cfg.seed_list().size()},
                   {"mean_residual_ratio", res.mean_residual_ratio},
                   {"residual_decreasing", res.residual_decreasing},
                   {"delta", cfg.delta},
                   {"w1_to_uniform_exceeds_delta", exceeds},
                   {"sample_size", res.runs.size()}};
  rep.tables = {runs};
  return rep;
}

ExperimentReport make_report(const ExperimentConfig& cfg, const DobrushinResult& res) {
  auto rep = base_report("dobrushin", cfg);
  CsvTable ce{"dobrushin_counterexample", {"time", "ratio", "stated_bound_0.9", "valid_bound_0.9"}, {}};
  for (std::size_t i = 0; i < res.ce_times.size(); ++i) {
    const double t = res.ce_times[i];
    ce.rows.push_back({t, res.ce_ratio[i], 0.9 * std::exp(kTwoParticleNominalRate * t),
                       0.9 * std::exp(kTwoParticleRate * t)});
  }
  rep.aggregate = {{"c", res.c},
                   {"pairs", res.pairs},
                   {"checks", res.checks},
                   {"violations", res.violations},
                   {"max_ratio", res.max_ratio},
                   {"identical_max", res.identical_max},
                   {"ce_min_margin_stated", res.ce_min_margin_nominal},
                   {"ce_first_failure", res.ce_first_failure},
                   {"ce_min_margin_valid", res.ce_min_margin_valid}};
  rep.tables = {ce};
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  const auto& name = cfg.experiment;
  if (name == "clusters") rep = make_report(cfg, run_cluster_experiment(cfg));
  else if (name == "pde") rep = make_report(cfg, run_pde_experiment(cfg));
  else if (name == "exit_time") rep = make_report(cfg, run_exit_time_scaling(cfg));
  else if (name == "meanfield") rep = make_report(cfg, run_meanfield_convergence(cfg));
  else if (name == "metastability") rep = make_report(cfg, run_metastability_phases(cfg));
  else if (name == "dobrushin") rep = make_report(cfg, run_dobrushin_suite(cfg));
  else throw Error("unknown experiment '" + name + "'");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.provenance = {{"version", kVersion},
                    {"wall_time_seconds", wall},
                    {"workers", cfg.workers > 0 ? cfg.workers : default_workers()}};
  return rep;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  json j = {{"experiment", report.name}, {"config", report.config},
            {"provenance", report.provenance}, {"aggregate", report.aggregate},
            {"records", report.records}};
  json tables = json::array();
  for (const auto& t : report.tables) {
    const auto file = t.name + ".csv";
    tables.push_back({{"name", t.name}, {"file", file}, {"rows", t.rows.size()}});
    std::ofstream out(base / file);
    if (!out) throw Error("cannot write " + (base / file).string());
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
      out << '\n';
    }
  }
  j["tables"] = tables;
  write_json((base / (report.name + "_report.json")).string(), j);
}

// ---- trajectories ----------------------------------------------------------

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "time,particle";
  if (traj.angular) {
    out << ",theta";
  } else {
    for (std::size_t c = 0; c < traj.dim; ++c) out << ",x" << c;
  }
  out << '\n' << std::setprecision(17);
  const std::size_t width = traj.angular ? 1 : traj.dim;
  for (const auto& s : traj.snapshots) {
    for (std::size_t i = 0; i * width < s.coords.size(); ++i) {
      out << s.time << ',' << i;
      for (std::size_t c = 0; c < width; ++c) out << ',' << s.coords[i * width + c];
      out << '\n';
    }
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "time" || header[1] != "particle") {
    throw Error(path + ": expected header time,particle,...");
  }
  Trajectory traj;
  traj.angular = header.size() == 3 && header[2] == "theta";
  traj.dim = traj.angular ? 2 : header.size() - 2;
  const std::size_t width = header.size() - 2;
  std::map<double, std::vector<double>> by_time;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    try {
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw Error(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (v.size() != header.size()) throw Error(path + ":" + std::to_string(lineno) + ": wrong column count");
    auto& row = by_time[v[0]];
    row.insert(row.end(), v.begin() + 2, v.end());
  }
  for (auto& [t, coords] : by_time) {
    if (coords.size() % width != 0) throw Error(path + ": ragged snapshot");
    traj.snapshots.push_back({t, std::move(coords)});
  }
  if (!traj.snapshots.empty()) traj.final_time = traj.snapshots.back().time;
  return traj;
}

void write_pde_csv(const std::string& path, const PdeRun& run) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "time,cell,theta,density\n" << std::setprecision(17);
  for (const auto& s : run.snapshots) {
    const auto& f = s.field;
    for (int m = 0; m < f.grid.cells(); ++m) {
      out << f.time << ',' << m << ',' << f.grid.node(m) << ',' << f.values[static_cast<std::size_t>(m)] << '\n';
    }
  }
}

json to_json(const PdeDiagnostics& d) {
  return {{"time", d.time},
          {"mass", d.mass},
          {"min_value", d.min_value},
          {"l1_to_uniform", d.l1_to_uniform},
          {"clip_events", d.clip_events},
          {"mode_amplitudes", d.mode_amplitudes},
          {"dominant_mode", d.dominant_mode}};
}

json to_json(const MeasureSummary& s, int modes) {
  json amps = json::array();
  for (int k = 1; k <= std::min(modes, s.fourier.k_cut()); ++k) amps.push_back(std::abs(s.fourier[k]));
  json j = {{"h_minus_1", s.h_minus_1},
            {"h_minus_2", s.h_minus_2},
            {"w1_to_uniform", s.w1_to_uniform},
            {"dominant_mode", s.dominant_mode},
            {"fourier_cutoff", s.fourier.k_cut()},
            {"mode_amplitudes", amps}};
  j["cluster_count"] = s.cluster_count ? json(*s.cluster_count) : json(nullptr);
  return j;
}

json to_json(const GegenbauerSpectrum& s, int modes) {
  json w = json::array(), g = json::array();
  for (int k = 0; k <= std::min(modes, s.k_cut()); ++k) {
    w.push_back(s.w_hat()[static_cast<std::size_t>(k)]);
    g.push_back(s.gamma(k));
  }
  return {{"dim", s.dim()},       {"k_cut", s.k_cut()},         {"k_max", s.k_max()},
          {"gamma_max", s.gamma_max()}, {"gamma_minus", s.gamma_minus()},
          {"w_hat", w},           {"gamma", g}};
}

}  // namespace attnflow
