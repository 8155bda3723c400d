#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnflow/particles.hpp"

namespace attnflow {

inline constexpr const char* kVersion = "0.1.0";

// Parameters shared by all experiments. Fields an experiment does not use are
// still echoed in its report.
struct ExperimentConfig {
  std::string experiment;
  std::vector<double> betas{5.0, 7.0};
  double beta = 5.0;
  int dim = 2;
  std::size_t n = 2000;
  std::vector<std::size_t> n_list;
  int grid = 2048;
  double dt = 5e-4;
  double horizon = 0.0;  // 0 selects the experiment's default
  std::vector<std::uint64_t> seeds;
  int replicas = 20;
  std::uint64_t seed_base = 0;

  // PDE exit threshold on the L1 distance, and the sensitivity list.
  double delta = 0.05;
  std::vector<double> deltas{0.05, 0.3, 1.0};
  double noise_sigma = 0.01;

  // Particle exit on the histogram TV distance.
  double tv_threshold = 0.5;
  std::vector<double> tv_thresholds{0.3, 0.5, 0.7};
  int tv_bins = 100;
  double exit_check_interval = 0.01;

  // Cluster readout: counts are taken every check_rates / gamma_max and a
  // count is accepted once it persists for persistence_rates / gamma_max,
  // counting only after the histogram TV to uniform exceeds tv_threshold.
  double gap_factor = 10.0;
  double min_mass = 0.02;
  double check_rates = 0.25;
  double persistence_rates = 3.0;

  double t_check = 1.0;
  std::vector<double> t_checks{0.25, 0.5, 1.0, 2.0};
  int pairs = 50;
  std::vector<double> pair_times{0.1, 0.25, 0.5, 0.75, 1.0};
  double perturbation = 0.05;
  double two_particle_eps = 1e-3;

  // Metastability: cap on T3 and the plateau rule for the cluster distance.
  double t3_max = 20.0;
  double t3_plateau = 1.0;

  bool full_scale = false;
  unsigned workers = 0;  // 0 selects default_workers()
  std::string output_dir;

  // Seeds from the explicit list, else seed_base .. seed_base + replicas - 1.
  std::vector<std::uint64_t> seed_list() const;
  void validate() const;
};

// Desk-scale defaults for one of: clusters, pde, exit_time, meanfield,
// metastability, dobrushin. full_scale switches to N = 1e4, M = 1e4.
ExperimentConfig default_config(const std::string& name, bool full_scale = false);
// Starts from default_config(j["experiment"]) and overrides the keys present.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json aggregate = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<CsvTable> tables;
};

// ---- cluster formation -----------------------------------------------------

struct ClusterRun {
  std::uint64_t seed = 0;
  // First count that persists for the persistence window (or the last count
  // when the horizon is reached first).
  std::optional<int> plateau_count;
  double plateau_time = 0.0;
  bool plateau_reached = false;
  std::vector<double> check_times;
  std::vector<std::optional<int>> counts;
  std::vector<int> dominant_modes;
  std::vector<double> final_angles;
  // angles of every (N/100)-th particle at each check
  std::vector<std::pair<double, std::vector<double>>> sample_path;
};

// Runs one configuration until its cluster count plateaus or the horizon.
ClusterRun cluster_run(AngularSystem sys, const IntegratorConfig& icfg, double gamma_max,
                       const ExperimentConfig& cfg, double horizon);

struct ClusterBetaResult {
  double beta = 0.0;
  bool skipped = false;
  std::string notice;
  int k_max = 0;
  double gamma_max = 0.0;
  double gamma_minus = 0.0;
  std::vector<double> gamma;
  std::vector<ClusterRun> runs;
  int matches = 0;
};

std::vector<ClusterBetaResult> run_cluster_experiment(const ExperimentConfig& cfg);

// ---- PDE periodicity -------------------------------------------------------

struct PdeSeedResult {
  std::uint64_t seed = 0;
  std::optional<double> exit_time;
  int dominant_mode = 0;
  std::vector<double> mode_amplitudes;  // k = 1..16 at exit
  // max over k not divisible by k_max of |nu_k| / |nu_dominant|
  double off_mode_ratio = 0.0;
  long clip_events = 0;
  // dominant mode at the exit for each threshold in cfg.deltas (0: no exit)
  std::vector<int> sensitivity_modes;
  std::vector<std::optional<double>> sensitivity_times;
};

struct PdeExperimentResult {
  int k_max = 0;
  std::vector<PdeSeedResult> runs;
  int dominant_matches = 0;
  int off_mode_ok = 0;
  // density snapshots of the first seed: (time, field values)
  std::vector<std::pair<double, std::vector<double>>> figure;
};

PdeExperimentResult run_pde_experiment(const ExperimentConfig& cfg);

// ---- exit-time scaling -----------------------------------------------------

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  std::size_t points = 0;
};

// Least squares y = slope x + intercept with a 95% t-interval for the slope.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ExitTimeRun {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::optional<double>> exit_times;  // per threshold
};

struct ExitThresholdSummary {
  double threshold = 0.0;
  std::vector<double> mean;  // per N, over exited replicas
  std::vector<double> stddev;
  std::vector<int> exited;
  LinearFit fit;  // mean exit time against ln N
  bool monotone = false;
};

struct ExitScalingResult {
  std::vector<std::size_t> n_list;
  std::vector<ExitTimeRun> runs;
  std::vector<ExitThresholdSummary> thresholds;
  std::size_t main_index = 0;  // entry for cfg.tv_threshold
  double gamma_max = 0.0;
  double predicted_slope = 0.0;  // 1 / (2 gamma_max)
  int not_exited = 0;
};

// Exit time of one replica for each threshold; stops after the largest.
ExitTimeRun exit_time_run(std::size_t n, std::uint64_t seed, const ExperimentConfig& cfg,
                          double horizon);
ExitScalingResult run_exit_time_scaling(const ExperimentConfig& cfg);

// ---- mean-field convergence ------------------------------------------------

struct MeanFieldResult {
  std::vector<std::size_t> n_list;
  std::vector<double> mean_w1;  // at t_check, per N
  std::vector<double> sd_w1;
  std::vector<double> baseline_w1;  // at t = 0, per N
  bool decreasing = false;
  // fixed N = cfg.n, distance at each of cfg.t_checks (seed-averaged)
  std::vector<double> time_w1;
  bool growing_in_time = false;
};

// W1 between particles and the PDE started from their cell-averaged density,
// at each of the (increasing) times.
std::vector<double> meanfield_distances(std::size_t n, std::uint64_t seed,
                                        const std::vector<double>& times,
                                        const ExperimentConfig& cfg);
MeanFieldResult run_meanfield_convergence(const ExperimentConfig& cfg);

// ---- metastability phases --------------------------------------------------

struct MetastabilityRun {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double norm_rho0 = 0.0;
  double t1 = 0.0, alpha = 0.0, t2 = 0.0, phase = 0.0;
  bool t1_nonpositive = false;
  bool t2_nonpositive = false;
  double residual_ratio = 0.0;       // |R|_{H^-2} / N^{-1/4} at T1
  double w1_to_falpha = 0.0;         // W1(mu(T1+T2), f^alpha(T2))
  double w1_to_uniform = 0.0;        // W1(mu(T1+T2), mu_inf)
  double falpha_w1_to_uniform = 0.0; // W1(f^alpha(T2), mu_inf)
  double t3 = 0.0;
  double inf_w1_cluster = 0.0;       // over [T1+T2, T1+T2+T3]
  double t_inf = 0.0;
};

struct MetastabilityResult {
  int k_max = 0;
  double gamma_max = 0.0;
  double gamma_minus = 0.0;
  std::vector<MetastabilityRun> runs;
  std::vector<std::size_t> n_list;
  std::vector<double> mean_residual_ratio;  // per N
  bool residual_decreasing = false;
};

MetastabilityRun metastability_run(std::size_t n, std::uint64_t seed, const ExperimentConfig& cfg);
MetastabilityResult run_metastability_phases(const ExperimentConfig& cfg);

// ---- Dobrushin stability ---------------------------------------------------

struct DobrushinResult {
  double c = 0.0;
  int pairs = 0;
  int checks = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max W1(t) / (e^{2Ct} W1(0))
  double identical_max = 0.0;
  std::vector<double> ce_times, ce_ratio;
  // min over t of ratio / (0.9 e^{2t/e^2}); >= 1 means the stated bound holds
  double ce_min_margin_nominal = 0.0;
  double ce_first_failure = -1.0;  // first t where it fails, -1 if none
  // same against the valid rate 2/(e^2+1)
  double ce_min_margin_valid = 0.0;
};

DobrushinResult run_dobrushin_suite(const ExperimentConfig& cfg);

// ---- reporting -------------------------------------------------------------

ExperimentReport make_report(const ExperimentConfig& cfg, const std::vector<ClusterBetaResult>& r);
ExperimentReport make_report(const ExperimentConfig& cfg, const PdeExperimentResult& r);
ExperimentReport make_report(const ExperimentConfig& cfg, const ExitScalingResult& r);
ExperimentReport make_report(const ExperimentConfig& cfg, const MeanFieldResult& r);
ExperimentReport make_report(const ExperimentConfig& cfg, const MetastabilityResult& r);
ExperimentReport make_report(const ExperimentConfig& cfg, const DobrushinResult& r);

// Runs the named experiment and returns its report with provenance filled in.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Writes <dir>/<name>_report.json and one CSV per table.
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace attnflow
