#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnflow/error.hpp"
#include "attnflow/experiments.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/measures.hpp"
#include "attnflow/parallel.hpp"
#include "attnflow/particles.hpp"
#include "attnflow/pde.hpp"
#include "attnflow/report_io.hpp"

using namespace attnflow;
using nlohmann::json;

namespace {

std::string sibling_json(const std::string& csv) {
  return std::filesystem::path(csv).replace_extension(".json").string();
}

int run_spectrum(double beta, int dim, int kcut, const std::string& out) {
  const auto kernel = InteractionKernel::transformer(beta);
  const auto spec = spectrum_for(kernel, dim, kcut);
  json header = to_json(spec, 0);
  header.erase("w_hat");
  header.erase("gamma");
  header["beta"] = beta;
  header["C"] = dobrushin_constant(kernel);
  std::cout << header.dump(2) << '\n';
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << "k,W_hat,gamma\n" << std::setprecision(17);
    for (int k = 0; k <= spec.k_cut(); ++k) f << k << ',' << spec.w_hat()[k] << ',' << spec.gamma(k) << '\n';
    write_json(sibling_json(out), header);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field dynamics of attention tokens on the sphere"};
  app.require_subcommand(1);

  double beta = 1.0;
  int dim = 2, kcut = 64;
  std::string out;
  auto* spectrum = app.add_subcommand("spectrum", "kernel coefficients and growth rates");
  spectrum->add_option("--beta", beta, "inverse temperature")->required();
  spectrum->add_option("--dim", dim, "ambient dimension d")->capture_default_str();
  spectrum->add_option("--kcut", kcut, "highest degree")->capture_default_str();
  spectrum->add_option("--out", out, "CSV output (k, W_hat, gamma) plus a .json header");

  std::string model = "usa";
  std::size_t n = 2000;
  double dt = 5e-4, horizon = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> snapshots;
  auto* particles = app.add_subcommand("simulate-particles", "integrate the token system");
  particles->add_option("--model", model, "usa or sa")
      ->check(CLI::IsMember({"usa", "sa"}))
      ->capture_default_str();
  particles->add_option("--beta", beta)->capture_default_str();
  particles->add_option("--n", n)->capture_default_str();
  particles->add_option("--dim", dim)->capture_default_str();
  particles->add_option("--dt", dt)->capture_default_str();
  particles->add_option("--horizon", horizon)->capture_default_str();
  particles->add_option("--seed", seed)->capture_default_str();
  particles->add_option("--snapshots", snapshots, "snapshot times")->delimiter(',');
  particles->add_option("--out", out)->required();

  int grid = 2048;
  double sigma = 0.01;
  auto* pde = app.add_subcommand("simulate-pde", "Lax-Friedrichs run of the continuity equation");
  pde->add_option("--beta", beta)->capture_default_str();
  pde->add_option("--grid", grid)->capture_default_str();
  pde->add_option("--noise-sigma", sigma)->capture_default_str();
  pde->add_option("--seed", seed)->capture_default_str();
  pde->add_option("--horizon", horizon)->capture_default_str();
  pde->add_option("--snapshots", snapshots)->delimiter(',');
  pde->add_option("--out", out)->required();

  std::string in;
  double gap_factor = 10.0, min_mass = 0.02, radius = 0.1;
  int fourier_cut = -1;
  auto* analyze = app.add_subcommand("analyze", "measure summary per snapshot of a trajectory CSV");
  analyze->add_option("--in", in)->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out)->required();
  analyze->add_option("--gap-factor", gap_factor)->capture_default_str();
  analyze->add_option("--min-mass", min_mass)->capture_default_str();
  analyze->add_option("--kcut", fourier_cut, "Fourier cutoff, -1 for min(N/2, 512)");
  analyze->add_option("--linkage-radius", radius, "cluster radius for d > 2")->capture_default_str();

  std::string name, config_path;
  bool full_scale = false;
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", name)
      ->required()
      ->check(CLI::IsMember({"clusters", "pde", "exit_time", "meanfield", "metastability", "dobrushin"}));
  experiment->add_option("--config", config_path, "JSON with ExperimentConfig fields")
      ->check(CLI::ExistingFile);
  experiment->add_option("--out", out)->required();
  experiment->add_flag("--full-scale", full_scale, "N = 1e4, M = 1e4 defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) return run_spectrum(beta, dim, kcut, out);

    if (*particles) {
      const auto m = model == "sa" ? Model::SA : Model::USA;
      const auto kernel = InteractionKernel::transformer(beta);
      IntegratorConfig icfg;
      icfg.dt = dt;
      icfg.rng_seed = seed;
      icfg.snapshot_times = snapshots;
      icfg.threads = default_workers();
      Trajectory traj;
      if (dim == 2) {
        auto sys = sample_uniform_angles(n, seed, m, kernel);
        traj = simulate(sys, icfg, horizon);
      } else {
        auto sys = sample_uniform_init(n, static_cast<std::size_t>(dim), seed, m, kernel);
        traj = simulate(sys, icfg, horizon);
      }
      write_trajectory_csv(out, traj);
      return 0;
    }

    if (*pde) {
      const PeriodicGrid g(grid);
      const auto nu0 = white_noise_density(g, sigma, seed);
      const auto run = simulate_pde(nu0, InteractionKernel::transformer(beta), horizon, snapshots);
      write_pde_csv(out, run);
      json diag = json::array();
      for (const auto& s : run.snapshots) diag.push_back(to_json(s.diagnostics));
      write_json(sibling_json(out), {{"beta", beta}, {"grid", grid}, {"noise_sigma", sigma},
                                     {"seed", seed}, {"steps", run.steps},
                                     {"clip_events", run.clip_events}, {"snapshots", diag}});
      return 0;
    }

    if (*analyze) {
      const auto traj = read_trajectory_csv(in);
      json snaps = json::array();
      for (const auto& s : traj.snapshots) {
        json j;
        if (traj.angular) {
          j = to_json(summarize(EmpiricalMeasure(s.coords), fourier_cut, gap_factor, min_mass));
        } else {
          j["cluster_count_linkage"] = count_clusters_linkage(s.coords, traj.dim, radius, min_mass);
          j["linkage_radius"] = radius;
        }
        j["time"] = s.time;
        snaps.push_back(j);
      }
      write_json(out, {{"input", in}, {"dim", traj.dim}, {"gap_factor", gap_factor},
                       {"min_mass", min_mass}, {"snapshots", snaps}});
      return 0;
    }

    if (*experiment) {
      json j = json::object();
      if (!config_path.empty()) {
        std::ifstream f(config_path);
        j = json::parse(f);
      }
      if (!j.contains("experiment")) j["experiment"] = name;
      if (j["experiment"] != name) throw Error("config names a different experiment");
      if (full_scale) j["full_scale"] = true;
      j["output_dir"] = out;
      const auto cfg = config_from_json(j);
      const auto report = run_experiment(cfg);
      write_report(report, out);
      std::cout << report.aggregate.dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
