#include "attnflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"
#include "attnflow/measures.hpp"
#include "attnflow/parallel.hpp"
#include "attnflow/pde.hpp"

namespace attnflow {

namespace {

unsigned workers_for(const ExperimentConfig& cfg) {
  return cfg.workers > 0 ? cfg.workers : default_workers();
}

IntegratorConfig integrator(const ExperimentConfig& cfg) {
  IntegratorConfig icfg;
  icfg.dt = cfg.dt;
  icfg.threads = 1;
  return icfg;
}

std::vector<double> angles_of(const AngularSystem& sys) {
  const auto a = sys.angles.angles();
  return {a.begin(), a.end()};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double t_quantile(std::size_t df) {
  if (df == 0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::students_t(static_cast<double>(df)), 0.975);
}

}  // namespace

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("fit_line: x and y differ in length");
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double mx = mean_of(x), my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: x values are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    sse += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    fit.slope_stderr = std::sqrt(sse / static_cast<double>(x.size() - 2) / sxx);
    const double q = t_quantile(x.size() - 2);
    fit.slope_ci_low = fit.slope - q * fit.slope_stderr;
    fit.slope_ci_high = fit.slope + q * fit.slope_stderr;
  } else {
    fit.slope_ci_low = -std::numeric_limits<double>::infinity();
    fit.slope_ci_high = std::numeric_limits<double>::infinity();
  }
  return fit;
}

// ---- cluster formation -----------------------------------------------------

ClusterRun cluster_run(AngularSystem sys, const IntegratorConfig& icfg, double gamma_max,
                       const ExperimentConfig& cfg, double horizon) {
  ClusterRun run;
  const long every = std::max(1L, std::lround(cfg.check_rates / gamma_max / icfg.dt));
  const double interval = static_cast<double>(every) * icfg.dt;
  const long need = static_cast<long>(std::ceil(cfg.persistence_rates / gamma_max / interval - 1e-9));
  long step = 0, streak = 0;
  double streak_start = 0.0;
  bool left_uniform = false;

  auto check = [&](const AngularSystem& s) {
    const EmpiricalMeasure mu(angles_of(s));
    const std::size_t stride = std::max<std::size_t>(1, s.size() / 100);
    std::vector<double> sample;
    for (std::size_t i = 0; i < s.size(); i += stride) sample.push_back(s.angles[i]);
    run.sample_path.emplace_back(s.time, std::move(sample));
    const auto count = count_clusters(mu, cfg.gap_factor, cfg.min_mass);
    run.check_times.push_back(s.time);
    run.dominant_modes.push_back(dominant_mode(empirical_fourier(mu, 16)));
    const bool same = count && !run.counts.empty() && run.counts.back() == count && streak > 0;
    run.counts.push_back(count);
    // counts are read only once the state has left the uniform one
    if (!left_uniform) left_uniform = tv_histogram_uniform(mu, cfg.tv_bins) > cfg.tv_threshold;
    if (!count || !left_uniform) {
      streak = 0;
    } else if (same) {
      ++streak;
    } else {
      streak = 1;
      streak_start = s.time;
    }
    if (streak > need) {
      run.plateau_count = count;
      run.plateau_time = streak_start;
      run.plateau_reached = true;
      return false;
    }
    return true;
  };

  check(sys);
  if (!run.plateau_reached) {
    simulate(sys, icfg, horizon, [&](const AngularSystem& s) {
      if (++step % every != 0) return true;
      return check(s);
    });
  }
  if (!run.plateau_reached) {
    run.plateau_count = run.counts.back();
    run.plateau_time = run.check_times.back();
  }
  run.final_angles = angles_of(sys);
  return run;
}

std::vector<ClusterBetaResult> run_cluster_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto seeds = cfg.seed_list();
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 30.0;
  std::vector<ClusterBetaResult> out;
  for (double beta : cfg.betas) {
    ClusterBetaResult res;
    res.beta = beta;
    const auto kernel = InteractionKernel::transformer(beta);
    try {
      const auto spec = spectrum_for(kernel, 2);
      res.k_max = spec.k_max();
      res.gamma_max = spec.gamma_max();
      res.gamma_minus = spec.gamma_minus();
      for (int k = 0; k <= std::min(12, spec.k_cut()); ++k) res.gamma.push_back(spec.gamma(k));
    } catch (const AssumptionViolation& e) {
      res.skipped = true;
      res.notice = e.what();
      out.push_back(std::move(res));
      continue;
    }
    res.runs.resize(seeds.size());
    const auto icfg = integrator(cfg);
    parallel_for(seeds.size(), workers_for(cfg), [&](std::size_t i) {
      auto sys = sample_uniform_angles(cfg.n, seeds[i], Model::USA, kernel);
      res.runs[i] = cluster_run(std::move(sys), icfg, res.gamma_max, cfg, horizon);
      res.runs[i].seed = seeds[i];
      if (i != 0) res.runs[i].sample_path.clear();
    });
    for (const auto& r : res.runs) res.matches += (r.plateau_count == res.k_max);
    out.push_back(std::move(res));
  }
  return out;
}

// ---- PDE periodicity -------------------------------------------------------

PdeExperimentResult run_pde_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto seeds = cfg.seed_list();
  const auto kernel = InteractionKernel::transformer(cfg.beta);
  const auto spec = spectrum_for(kernel, 2);
  const PeriodicGrid grid(cfg.grid);
  const double dt = kDefaultCflRatio * grid.dx();
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 10.0;
  const long total = std::lround(horizon / dt);

  std::vector<double> deltas = cfg.deltas;
  if (std::find(deltas.begin(), deltas.end(), cfg.delta) == deltas.end()) deltas.push_back(cfg.delta);
  const std::size_t main =
      static_cast<std::size_t>(std::find(deltas.begin(), deltas.end(), cfg.delta) - deltas.begin());

  PdeExperimentResult res;
  res.k_max = spec.k_max();
  res.runs.resize(seeds.size());
  const long figure_every = std::max(1L, total / 20);

  parallel_for(seeds.size(), workers_for(cfg), [&](std::size_t i) {
    PdeSeedResult& r = res.runs[i];
    r.seed = seeds[i];
    auto nu = white_noise_density(grid, cfg.noise_sigma, seeds[i]);
    LaxFriedrichsSolver solver(grid, kernel);
    std::vector<ExitDetector> detectors;
    std::vector<bool> armed(deltas.size(), false), done(deltas.size(), false);
    for (double d : deltas) detectors.emplace_back(d);
    r.sensitivity_modes.assign(deltas.size(), 0);
    r.sensitivity_times.assign(deltas.size(), std::nullopt);
    std::vector<std::pair<double, std::vector<double>>> figure;
    if (i == 0) figure.emplace_back(nu.time, nu.values);

    auto observe = [&](const DensityField& f) {
      const double dist = l1_to_uniform(f);
      bool all = true;
      for (std::size_t j = 0; j < deltas.size(); ++j) {
        if (done[j]) continue;
        if (!armed[j] && dist <= deltas[j]) armed[j] = true;
        if (armed[j] && detectors[j].feed(f.time, dist)) {
          done[j] = true;
          r.sensitivity_times[j] = detectors[j].result().time;
          const auto diag = diagnose(f, r.clip_events, 16);
          r.sensitivity_modes[j] = diag.dominant_mode;
          if (j == main) {
            r.exit_time = detectors[j].result().time;
            r.mode_amplitudes = diag.mode_amplitudes;
            r.dominant_mode = diag.dominant_mode;
            if (i == 0) figure.emplace_back(f.time, f.values);
          }
        }
        all = all && done[j];
      }
      return !all;
    };

    observe(nu);
    for (long s = 1; s <= total; ++s) {
      r.clip_events += solver.step(nu, dt).clipped;
      nu.time = static_cast<double>(s) * dt;
      if (i == 0 && s % figure_every == 0) figure.emplace_back(nu.time, nu.values);
      if (!observe(nu)) break;
    }
    if (r.exit_time && r.dominant_mode > 0) {
      const double dom = r.mode_amplitudes[static_cast<std::size_t>(r.dominant_mode - 1)];
      for (std::size_t k = 1; k <= r.mode_amplitudes.size(); ++k) {
        if (static_cast<int>(k) % res.k_max == 0) continue;
        r.off_mode_ratio = std::max(r.off_mode_ratio, r.mode_amplitudes[k - 1] / dom);
      }
    }
    if (i == 0) {
      std::sort(figure.begin(), figure.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      res.figure = std::move(figure);
    }
  });
  for (const auto& r : res.runs) {
    res.dominant_matches += (r.exit_time && r.dominant_mode == res.k_max);
    res.off_mode_ok += (r.exit_time && r.off_mode_ratio <= 0.1);
  }
  return res;
}

// ---- exit-time scaling -----------------------------------------------------

ExitTimeRun exit_time_run(std::size_t n, std::uint64_t seed, const ExperimentConfig& cfg,
                          double horizon) {
  ExitTimeRun run;
  run.n = n;
  run.seed = seed;
  const auto kernel = InteractionKernel::transformer(cfg.beta);
  auto sys = sample_uniform_angles(n, seed, Model::USA, kernel);
  const auto icfg = integrator(cfg);
  const long every = std::max(1L, std::lround(cfg.exit_check_interval / cfg.dt));
  std::vector<ExitDetector> detectors;
  for (double d : cfg.tv_thresholds) detectors.emplace_back(d);
  auto feed = [&](const AngularSystem& s) {
    const double tv = tv_histogram_uniform(EmpiricalMeasure(angles_of(s)), cfg.tv_bins);
    bool all = true;
    for (auto& d : detectors) all = d.feed(s.time, tv) && all;
    return !all;
  };
  long step = 0;
  if (feed(sys)) {
    simulate(sys, icfg, horizon, [&](const AngularSystem& s) {
      if (++step % every != 0) return true;
      return feed(s);
    });
  }
  for (const auto& d : detectors) run.exit_times.push_back(d.result().time);
  return run;
}

ExitScalingResult run_exit_time_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentConfig c = cfg;
  if (std::find(c.tv_thresholds.begin(), c.tv_thresholds.end(), c.tv_threshold) ==
      c.tv_thresholds.end()) {
    c.tv_thresholds.push_back(c.tv_threshold);
  }
  const auto seeds = c.seed_list();
  const double horizon = c.horizon > 0.0 ? c.horizon : 30.0;
  const auto spec = spectrum_for(InteractionKernel::transformer(c.beta), 2);

  ExitScalingResult res;
  res.n_list = c.n_list.empty() ? std::vector<std::size_t>{c.n} : c.n_list;
  res.gamma_max = spec.gamma_max();
  res.predicted_slope = 1.0 / (2.0 * spec.gamma_max());
  res.main_index = static_cast<std::size_t>(
      std::find(c.tv_thresholds.begin(), c.tv_thresholds.end(), c.tv_threshold) -
      c.tv_thresholds.begin());

  const std::size_t jobs = res.n_list.size() * seeds.size();
  res.runs.resize(jobs);
  parallel_for(jobs, workers_for(c), [&](std::size_t j) {
    res.runs[j] = exit_time_run(res.n_list[j / seeds.size()], seeds[j % seeds.size()], c, horizon);
  });

  for (std::size_t t = 0; t < c.tv_thresholds.size(); ++t) {
    ExitThresholdSummary s;
    s.threshold = c.tv_thresholds[t];
    std::vector<double> x, y;
    for (std::size_t a = 0; a < res.n_list.size(); ++a) {
      std::vector<double> times;
      for (std::size_t b = 0; b < seeds.size(); ++b) {
        const auto& e = res.runs[a * seeds.size() + b].exit_times[t];
        if (e) times.push_back(*e);
        else if (t == res.main_index) ++res.not_exited;
      }
      s.mean.push_back(mean_of(times));
      s.stddev.push_back(stddev_of(times));
      s.exited.push_back(static_cast<int>(times.size()));
      if (!times.empty()) {
        x.push_back(std::log(static_cast<double>(res.n_list[a])));
        y.push_back(s.mean.back());
      }
    }
    s.monotone = y.size() == res.n_list.size();
    for (std::size_t a = 1; a < y.size(); ++a) s.monotone = s.monotone && y[a] > y[a - 1];
    if (x.size() >= 2) s.fit = fit_line(x, y);
    res.thresholds.push_back(std::move(s));
  }
  return res;
}

// ---- mean-field convergence ------------------------------------------------

std::vector<double> meanfield_distances(std::size_t n, std::uint64_t seed,
                                        const std::vector<double>& times,
                                        const ExperimentConfig& cfg) {
  const auto kernel = InteractionKernel::transformer(cfg.beta);
  auto sys = sample_uniform_angles(n, seed, Model::USA, kernel);
  const PeriodicGrid grid(cfg.grid);
  const auto field0 = density_of(EmpiricalMeasure(angles_of(sys)), grid);
  const double horizon = times.empty() ? 0.0 : times.back();

  auto icfg = integrator(cfg);
  icfg.snapshot_times = times;
  const auto traj = simulate(sys, icfg, horizon);
  const auto pde = simulate_pde(field0, kernel, horizon, times);

  std::vector<double> out;
  for (double t : times) {
    auto near = [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); };
    const auto ps = std::min_element(traj.snapshots.begin(), traj.snapshots.end(),
                                     [&](const auto& a, const auto& b) { return near(a.time, b.time); });
    const auto fs = std::min_element(pde.snapshots.begin(), pde.snapshots.end(),
                                     [&](const auto& a, const auto& b) {
                                       return near(a.field.time, b.field.time);
                                     });
    out.push_back(wasserstein1_circle(EmpiricalMeasure(ps->coords), fs->field));
  }
  return out;
}

MeanFieldResult run_meanfield_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.t_check > 2.0) throw Error("meanfield: t_check must be at most 2");
  const auto seeds = cfg.seed_list();
  MeanFieldResult res;
  res.n_list = cfg.n_list.empty() ? std::vector<std::size_t>{cfg.n} : cfg.n_list;
  const std::size_t jobs = res.n_list.size() * seeds.size();
  std::vector<std::vector<double>> d(jobs);
  parallel_for(jobs, workers_for(cfg), [&](std::size_t j) {
    d[j] = meanfield_distances(res.n_list[j / seeds.size()], seeds[j % seeds.size()],
                               {0.0, cfg.t_check}, cfg);
  });
  for (std::size_t a = 0; a < res.n_list.size(); ++a) {
    std::vector<double> at0, at1;
    for (std::size_t b = 0; b < seeds.size(); ++b) {
      at0.push_back(d[a * seeds.size() + b][0]);
      at1.push_back(d[a * seeds.size() + b][1]);
    }
    res.baseline_w1.push_back(mean_of(at0));
    res.mean_w1.push_back(mean_of(at1));
    res.sd_w1.push_back(stddev_of(at1));
  }
  res.decreasing = true;
  for (std::size_t a = 1; a < res.mean_w1.size(); ++a) {
    res.decreasing = res.decreasing && res.mean_w1[a] < res.mean_w1[a - 1];
  }

  std::vector<double> times = cfg.t_checks;
  std::sort(times.begin(), times.end());
  std::vector<std::vector<double>> td(seeds.size());
  parallel_for(seeds.size(), workers_for(cfg),
               [&](std::size_t b) { td[b] = meanfield_distances(cfg.n, seeds[b], times, cfg); });
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> v;
    for (const auto& row : td) v.push_back(row[k]);
    res.time_w1.push_back(mean_of(v));
  }
  res.growing_in_time = true;
  for (std::size_t k = 1; k < res.time_w1.size(); ++k) {
    res.growing_in_time = res.growing_in_time && res.time_w1[k] > res.time_w1[k - 1];
  }
  return res;
}

// ---- metastability phases --------------------------------------------------

MetastabilityRun metastability_run(std::size_t n, std::uint64_t seed, const ExperimentConfig& cfg) {
  const auto kernel = InteractionKernel::transformer(cfg.beta);
  const auto spec = spectrum_for(kernel, 2);
  const int k = spec.k_max();
  const double gamma = spec.gamma_max();
  MetastabilityRun run;
  run.n = n;
  run.seed = seed;

  auto sys = sample_uniform_angles(n, seed, Model::USA, kernel);
  const int cut = default_fourier_cutoff(n);
  const auto rho0 = empirical_fourier(EmpiricalMeasure(angles_of(sys)), cut);
  run.norm_rho0 = sobolev_neg_norm(rho0, 1).value;
  const auto rk = rho0[k];
  const auto pt = phase_times(spec, n, run.norm_rho0, std::abs(rk), cfg.delta);
  run.t1_nonpositive = pt.t1_nonpositive;
  run.t1 = std::max(0.0, pt.t1);
  run.alpha = pt.alpha;
  run.t2_nonpositive = pt.t2 <= 0.0;
  run.t2 = std::max(0.0, pt.t2);
  run.phase = -std::arg(rk) / k;

  const auto icfg = integrator(cfg);
  simulate(sys, icfg, run.t1);

  // mu(T1) = mu_inf + (linear mode k_max term) + R
  auto r1 = empirical_fourier(EmpiricalMeasure(angles_of(sys)), cut);
  r1.at(k) -= rk * std::exp(gamma * run.t1);
  run.residual_ratio = sobolev_neg_norm(r1, 2).value / std::pow(static_cast<double>(n), -0.25);

  const PeriodicGrid grid(cfg.grid);
  auto f = cosine_density(grid, run.alpha / kPi, k, run.phase);
  if (is_power_of_two(grid.cells())) {
    SpectralSolver solver(grid, kernel);
    solver.advance(f, run.t2, 1e-3);
  } else {
    f = simulate_pde(f, kernel, run.t2, {}).final_field;
  }
  simulate(sys, icfg, run.t2);
  const EmpiricalMeasure mu2(angles_of(sys));
  run.w1_to_falpha = wasserstein1_circle(mu2, f);
  run.w1_to_uniform = wasserstein1_to_uniform(mu2);
  run.falpha_w1_to_uniform = wasserstein1_circle(f, uniform_density(grid));

  // Clustering phase: follow W1 to mu_cluster until it stops improving.
  const long every = std::max(1L, std::lround(0.05 / cfg.dt));
  const double start = sys.time;
  run.inf_w1_cluster = w1_to_cluster(mu2, k);
  run.t_inf = start;
  double last_improvement = start;
  long step = 0;
  simulate(sys, icfg, cfg.t3_max, [&](const AngularSystem& s) {
    if (++step % every != 0) return true;
    const double w = w1_to_cluster(EmpiricalMeasure(angles_of(s)), k);
    if (w < 0.99 * run.inf_w1_cluster) last_improvement = s.time;
    if (w < run.inf_w1_cluster) {
      run.inf_w1_cluster = w;
      run.t_inf = s.time;
    }
    return s.time - last_improvement < cfg.t3_plateau;
  });
  run.t3 = sys.time - start;
  return run;
}

MetastabilityResult run_metastability_phases(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto spec = spectrum_for(InteractionKernel::transformer(cfg.beta), 2);
  const auto seeds = cfg.seed_list();
  MetastabilityResult res;
  res.k_max = spec.k_max();
  res.gamma_max = spec.gamma_max();
  res.gamma_minus = spec.gamma_minus();
  res.n_list = cfg.n_list.empty() ? std::vector<std::size_t>{cfg.n} : cfg.n_list;
  const std::size_t jobs = res.n_list.size() * seeds.size();
  res.runs.resize(jobs);
  parallel_for(jobs, workers_for(cfg), [&](std::size_t j) {
    res.runs[j] = metastability_run(res.n_list[j / seeds.size()], seeds[j % seeds.size()], cfg);
  });
  for (std::size_t a = 0; a < res.n_list.size(); ++a) {
    std::vector<double> v;
    for (std::size_t b = 0; b < seeds.size(); ++b) v.push_back(res.runs[a * seeds.size() + b].residual_ratio);
    res.mean_residual_ratio.push_back(mean_of(v));
  }
  res.residual_decreasing = true;
  for (std::size_t a = 1; a < res.mean_residual_ratio.size(); ++a) {
    res.residual_decreasing =
        res.residual_decreasing && res.mean_residual_ratio[a] < res.mean_residual_ratio[a - 1];
  }
  return res;
}

// ---- Dobrushin stability ---------------------------------------------------

DobrushinResult run_dobrushin_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto kernel = InteractionKernel::transformer(cfg.beta);
  DobrushinResult res;
  res.c = dobrushin_constant(kernel);
  res.pairs = cfg.pairs;
  auto icfg = integrator(cfg);
  icfg.snapshot_times = cfg.pair_times;
  const double horizon = *std::max_element(cfg.pair_times.begin(), cfg.pair_times.end());

  struct PairOutcome {
    int checks = 0, violations = 0;
    double max_ratio = 0.0, identical = 0.0;
  };
  std::vector<PairOutcome> outcomes(static_cast<std::size_t>(cfg.pairs));
  parallel_for(outcomes.size(), workers_for(cfg), [&](std::size_t p) {
    const std::uint64_t s = cfg.seed_base + 2 * p;
    auto a = sample_uniform_angles(cfg.n, s, Model::USA, kernel);
    AngularSystem b;
    if (p % 2 == 0) {
      b = sample_uniform_angles(cfg.n, s + 1, Model::USA, kernel);
    } else {
      // nearby pair: independent uniform jitter of every atom
      std::mt19937_64 rng(s + 1);
      std::uniform_real_distribution<double> jitter(-cfg.perturbation, cfg.perturbation);
      std::vector<double> th = angles_of(a);
      for (double& x : th) x += jitter(rng);
      b = AngularSystem{AngleConfiguration(th), Model::USA, kernel, 0.0};
    }
    AngularSystem a2 = a;
    const double w0 = wasserstein1_circle(EmpiricalMeasure(angles_of(a)), EmpiricalMeasure(angles_of(b)));
    const auto ta = simulate(a, icfg, horizon);
    const auto tb = simulate(b, icfg, horizon);
    const auto tc = simulate(a2, icfg, horizon);
    PairOutcome& o = outcomes[p];
    for (std::size_t i = 1; i < ta.snapshots.size(); ++i) {
      const double t = ta.snapshots[i].time;
      const double w = wasserstein1_circle(EmpiricalMeasure(ta.snapshots[i].coords),
                                           EmpiricalMeasure(tb.snapshots[i].coords));
      const double bound = std::exp(2.0 * res.c * t) * w0;
      ++o.checks;
      if (w > bound * (1.0 + 1e-3)) ++o.violations;
      o.max_ratio = std::max(o.max_ratio, w / bound);
      o.identical = std::max(o.identical, wasserstein1_circle(EmpiricalMeasure(ta.snapshots[i].coords),
                                                              EmpiricalMeasure(tc.snapshots[i].coords)));
    }
  });
  for (const auto& o : outcomes) {
    res.checks += o.checks;
    res.violations += o.violations;
    res.max_ratio = std::max(res.max_ratio, o.max_ratio);
    res.identical_max = std::max(res.identical_max, o.identical);
  }

  // Two-particle counterexample: omega0 = pi - 2 eps, ratio = (pi - omega) / (2 eps).
  const double eps = cfg.two_particle_eps;
  const auto traj = two_particle_omega(kPi - 2.0 * eps, 5.0, 1e-3);
  res.ce_min_margin_nominal = std::numeric_limits<double>::infinity();
  res.ce_min_margin_valid = std::numeric_limits<double>::infinity();
  const std::size_t stride = std::max<std::size_t>(1, traj.times.size() / 500);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double ratio = (kPi - traj.omega[i]) / (2.0 * eps);
    const double nominal = ratio / (0.9 * std::exp(kTwoParticleNominalRate * t));
    const double valid = ratio / (0.9 * std::exp(kTwoParticleRate * t));
    res.ce_min_margin_nominal = std::min(res.ce_min_margin_nominal, nominal);
    res.ce_min_margin_valid = std::min(res.ce_min_margin_valid, valid);
    if (nominal < 1.0 && res.ce_first_failure < 0.0) res.ce_first_failure = t;
    if (i % stride == 0 || i + 1 == traj.times.size()) {
      res.ce_times.push_back(t);
      res.ce_ratio.push_back(ratio);
    }
  }
  return res;
}

}  // namespace attnflow
