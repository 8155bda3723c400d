#include "attnflow/particles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/parallel.hpp"

namespace attnflow {

unsigned default_workers() {
  if (const char* env = std::getenv("ATTNFLOW_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || dt > 1e-2) throw Error("IntegratorConfig: dt must lie in (0, 1e-2]");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw Error("IntegratorConfig: snapshot times must be nondecreasing");
  }
}

namespace {

constexpr std::size_t kSpectralThreshold = 64;

void require_transformer_for_sa(const InteractionKernel& kernel) {
  if (!kernel.is_transformer()) throw Error("SA model requires the transformer kernel");
}

std::vector<double> rhs_impl(const ParticleSystem& sys, bool softmax, unsigned threads) {
  const std::size_t n = sys.size(), d = sys.dim;
  std::vector<double> v(n * d, 0.0);
  if (n <= 1) return v;
  if (softmax) require_transformer_for_sa(sys.kernel);
  const double beta = softmax ? sys.kernel.beta() : 0.0;
  parallel_for(n, threads, [&](std::size_t i) {
    const auto xi = sys.position(i);
    std::vector<double> acc(d, 0.0);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = sys.position(j);
      double q = 0.0;
      for (std::size_t c = 0; c < d; ++c) q += xi[c] * xj[c];
      const double w = softmax ? std::exp(beta * q) : sys.kernel.W_prime(q);
      z += w;
      for (std::size_t c = 0; c < d; ++c) acc[c] += w * xj[c];
    }
    const double norm_factor = softmax ? 1.0 / z : 1.0 / static_cast<double>(n);
    double q = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      acc[c] *= norm_factor;
      q += acc[c] * xi[c];
    }
    for (std::size_t c = 0; c < d; ++c) v[i * d + c] = acc[c] - q * xi[c];
  });
  return v;
}

// Cosine-series force evaluation with cached coefficients.
class SpectralForce {
 public:
  SpectralForce(const InteractionKernel& kernel, Model model, int modes)
      : model_(model), a_(kernel.cosine_coeffs(modes)), sums_(modes + 1) {
    if (model == Model::SA) {
      require_transformer_for_sa(kernel);
      beta_ = kernel.beta();
    }
  }

  void operator()(std::span<const double> theta, std::span<double> out) {
    const std::size_t n = theta.size();
    const int K = static_cast<int>(a_.size()) - 1;
    std::fill(sums_.begin(), sums_.end(), std::complex<double>{});
    // S_k = (1/N) sum_j e^{ik theta_j}, accumulated in index order.
    for (std::size_t j = 0; j < n; ++j) {
      const std::complex<double> w{std::cos(theta[j]), std::sin(theta[j])};
      std::complex<double> p = w;
      for (int k = 1; k <= K; ++k) {
        sums_[k] += p;
        p *= w;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int k = 1; k <= K; ++k) sums_[k] *= inv_n;
    for (std::size_t i = 0; i < n; ++i) {
      const std::complex<double> w{std::cos(theta[i]), std::sin(theta[i])};
      std::complex<double> p = w;
      double chi = 0.0, zpart = a_[0];
      for (int k = 1; k <= K; ++k) {
        const std::complex<double> t = p * std::conj(sums_[k]);
        chi -= k * a_[k] * t.imag();
        zpart += a_[k] * t.real();
        p *= w;
      }
      out[i] = model_ == Model::USA ? chi : chi / (beta_ * zpart);
    }
  }

 private:
  Model model_;
  double beta_ = 0.0;
  std::vector<double> a_;
  std::vector<std::complex<double>> sums_;
};

bool use_spectral(ForceMethod method, std::size_t n) {
  if (method == ForceMethod::Auto) return n > kSpectralThreshold;
  return method == ForceMethod::Spectral;
}

// Evaluates angular velocities with the configured method.
class AngularForce {
 public:
  AngularForce(const AngularSystem& sys, const IntegratorConfig& cfg)
      : threads_(cfg.threads), spectral_(use_spectral(cfg.force, sys.size())) {
    if (spectral_) force_.emplace(sys.kernel, sys.model, sys.kernel.force_truncation());
  }

  void operator()(const AngularSystem& sys, std::span<const double> theta, std::span<double> out) {
    if (theta.size() <= 1) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    if (spectral_) {
      (*force_)(theta, out);
      return;
    }
    const std::vector<double> v =
        angular_rhs(AngleConfiguration(std::vector<double>(theta.begin(), theta.end())),
                    sys.kernel, sys.model, threads_);
    std::copy(v.begin(), v.end(), out.begin());
  }

 private:
  unsigned threads_;
  bool spectral_;
  std::optional<SpectralForce> force_;
};

void check_finite(std::span<const double> values, std::size_t stride, double time) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "non-finite state at t=" << time << ", particle " << i / stride;
      throw NonFiniteState(os.str(), time, i / stride);
    }
  }
}

void normalize_rows(std::vector<double>& coords, std::size_t d) {
  const std::size_t n = coords.size() / d;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += coords[i * d + c] * coords[i * d + c];
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t c = 0; c < d; ++c) coords[i * d + c] *= inv;
  }
}

// One step in place; `force` fills velocities for a given angle array.
template <class Force>
void advance_angles(AngularSystem& sys, const IntegratorConfig& cfg, double dt, Force& force,
                    std::vector<double>& theta, std::vector<double>& v1,
                    std::vector<double>& v2, std::vector<double>& tmp) {
  force(sys, theta, v1);
  if (cfg.scheme == Scheme::Heun) {
    for (std::size_t i = 0; i < theta.size(); ++i) tmp[i] = wrap_angle(theta[i] + dt * v1[i]);
    force(sys, tmp, v2);
    for (std::size_t i = 0; i < theta.size(); ++i) v1[i] = 0.5 * (v1[i] + v2[i]);
  }
  for (std::size_t i = 0; i < theta.size(); ++i) tmp[i] = theta[i] + dt * v1[i];
  check_finite(tmp, 1, sys.time + dt);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = wrap_angle(tmp[i]);
}

void advance_points(ParticleSystem& sys, const IntegratorConfig& cfg, double dt) {
  const std::size_t d = sys.dim;
  std::vector<double> v = rhs(sys, cfg.threads);
  if (cfg.scheme == Scheme::Heun) {
    ParticleSystem trial = sys;
    for (std::size_t i = 0; i < v.size(); ++i) trial.coords[i] += dt * v[i];
    normalize_rows(trial.coords, d);
    const std::vector<double> v2 = rhs(trial, cfg.threads);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (v[i] + v2[i]);
  }
  std::vector<double> next = sys.coords;
  for (std::size_t i = 0; i < v.size(); ++i) next[i] += dt * v[i];
  check_finite(next, d, sys.time + dt);
  if (cfg.renormalize_every_step) normalize_rows(next, d);
  sys.coords = std::move(next);
}

std::vector<long long> snapshot_steps(const IntegratorConfig& cfg, long long total) {
  std::vector<long long> steps;
  for (double t : cfg.snapshot_times) {
    if (t < 0.0) continue;
    const long long s = std::llround(t / cfg.dt);
    if (s > total) break;
    if (s == 0) continue;  // the initial state is always recorded
    if (steps.empty() || steps.back() != s) steps.push_back(s);
  }
  return steps;
}

}  // namespace

std::vector<double> rhs_usa(const ParticleSystem& sys, unsigned threads) {
  return rhs_impl(sys, false, threads);
}

std::vector<double> rhs_sa(const ParticleSystem& sys, unsigned threads) {
  return rhs_impl(sys, true, threads);
}

std::vector<double> rhs(const ParticleSystem& sys, unsigned threads) {
  return sys.model == Model::USA ? rhs_usa(sys, threads) : rhs_sa(sys, threads);
}

std::vector<double> angular_rhs(const AngleConfiguration& cfg, const InteractionKernel& kernel,
                                Model model, unsigned threads) {
  const std::size_t n = cfg.size();
  std::vector<double> v(n, 0.0);
  if (n <= 1) return v;
  const bool softmax = model == Model::SA;
  if (softmax) require_transformer_for_sa(kernel);
  const auto theta = cfg.angles();
  parallel_for(n, threads, [&](std::size_t i) {
    double num = 0.0, z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double delta = theta[i] - theta[j];
      if (softmax) {
        const double w = std::exp(kernel.beta() * std::cos(delta));
        num -= w * std::sin(delta);
        z += w;
      } else {
        num += kernel.h_prime(delta);
      }
    }
    v[i] = softmax ? num / z : num / static_cast<double>(n);
  });
  return v;
}

std::vector<double> angular_rhs_spectral(const AngleConfiguration& cfg,
                                         const InteractionKernel& kernel, Model model,
                                         int modes) {
  std::vector<double> v(cfg.size(), 0.0);
  if (cfg.size() <= 1) return v;
  SpectralForce force(kernel, model, modes);
  force(cfg.angles(), v);
  return v;
}

ParticleSystem step_euler(const ParticleSystem& sys, const IntegratorConfig& cfg) {
  cfg.validate();
  ParticleSystem next = sys;
  advance_points(next, cfg, cfg.dt);
  next.time = sys.time + cfg.dt;
  return next;
}

AngularSystem step_euler(const AngularSystem& sys, const IntegratorConfig& cfg) {
  cfg.validate();
  AngularSystem next = sys;
  AngularForce force(sys, cfg);
  std::vector<double> theta(sys.angles.angles().begin(), sys.angles.angles().end());
  std::vector<double> v1(theta.size()), v2(theta.size()), tmp(theta.size());
  advance_angles(next, cfg, cfg.dt, force, theta, v1, v2, tmp);
  next.angles = AngleConfiguration(std::move(theta));
  next.time = sys.time + cfg.dt;
  return next;
}

Trajectory simulate(AngularSystem& sys, const IntegratorConfig& cfg, double horizon,
                    const AngularObserver& observer) {
  cfg.validate();
  if (horizon < 0.0) throw Error("simulate: negative horizon");
  Trajectory traj;
  traj.dim = 2;
  traj.angular = true;
  const double t0 = sys.time;
  const long long total = std::llround(horizon / cfg.dt);
  const std::vector<long long> snaps = snapshot_steps(cfg, total);
  auto record = [&] {
    traj.snapshots.push_back({sys.time, {sys.angles.angles().begin(), sys.angles.angles().end()}});
  };
  record();
  traj.final_time = sys.time;
  if (observer && !observer(sys)) {
    traj.stopped_early = true;
    return traj;
  }
  AngularForce force(sys, cfg);
  std::vector<double> theta(sys.angles.angles().begin(), sys.angles.angles().end());
  std::vector<double> v1(theta.size()), v2(theta.size()), tmp(theta.size());
  std::size_t next_snap = 0;
  for (long long step = 1; step <= total; ++step) {
    advance_angles(sys, cfg, cfg.dt, force, theta, v1, v2, tmp);
    sys.angles = AngleConfiguration(theta);
    sys.time = t0 + static_cast<double>(step) * cfg.dt;
    if (next_snap < snaps.size() && snaps[next_snap] == step) {
      record();
      ++next_snap;
    }
    traj.final_time = sys.time;
    if (observer && !observer(sys)) {
      traj.stopped_early = true;
      break;
    }
  }
  return traj;
}

Trajectory simulate(ParticleSystem& sys, const IntegratorConfig& cfg, double horizon,
                    const ParticleObserver& observer) {
  cfg.validate();
  if (horizon < 0.0) throw Error("simulate: negative horizon");
  Trajectory traj;
  traj.dim = sys.dim;
  const double t0 = sys.time;
  const long long total = std::llround(horizon / cfg.dt);
  const std::vector<long long> snaps = snapshot_steps(cfg, total);
  auto record = [&] { traj.snapshots.push_back({sys.time, sys.coords}); };
  record();
  traj.final_time = sys.time;
  if (observer && !observer(sys)) {
    traj.stopped_early = true;
    return traj;
  }
  std::size_t next_snap = 0;
  for (long long step = 1; step <= total; ++step) {
    advance_points(sys, cfg, cfg.dt);
    sys.time = t0 + static_cast<double>(step) * cfg.dt;
    if (next_snap < snaps.size() && snaps[next_snap] == step) {
      record();
      ++next_snap;
    }
    traj.final_time = sys.time;
    if (observer && !observer(sys)) {
      traj.stopped_early = true;
      break;
    }
  }
  return traj;
}

OmegaTrajectory two_particle_omega(double omega0, double horizon, double dt) {
  if (!(omega0 >= 0.0 && omega0 <= kPi)) throw Error("two_particle_omega: omega0 outside [0, pi]");
  if (!(dt > 0.0) || horizon < 0.0) throw Error("two_particle_omega: invalid dt or horizon");
  const double e = std::exp(1.0);
  auto f = [e](double w) {
    const double ew = std::exp(std::cos(w));
    return -2.0 * ew * std::sin(w) / (e + ew);
  };
  OmegaTrajectory out;
  const long long steps = std::llround(horizon / dt);
  out.times.reserve(steps + 1);
  out.omega.reserve(steps + 1);
  double w = omega0;
  out.times.push_back(0.0);
  out.omega.push_back(w);
  for (long long s = 1; s <= steps; ++s) {
    const double k1 = f(w);
    const double k2 = f(w + 0.5 * dt * k1);
    const double k3 = f(w + 0.5 * dt * k2);
    const double k4 = f(w + dt * k3);
    w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    w = std::clamp(w, 0.0, kPi);
    out.times.push_back(static_cast<double>(s) * dt);
    out.omega.push_back(w);
  }
  return out;
}

double two_particle_upper_bound(double omega0, double t, double rate) {
  return 2.0 * std::atan(std::tan(0.5 * omega0) * std::exp(-rate * t));
}

ParticleSystem sample_uniform_init(std::size_t n, std::size_t d, std::uint64_t seed, Model model,
                                   InteractionKernel kernel) {
  if (n < 1) throw Error("sample_uniform_init requires N >= 1");
  if (d < 2) throw Error("sample_uniform_init requires d >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParticleSystem sys{d, std::vector<double>(n * d), model, std::move(kernel), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    do {
      s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        sys.coords[i * d + c] = gauss(rng);
        s += sys.coords[i * d + c] * sys.coords[i * d + c];
      }
    } while (s == 0.0);
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t c = 0; c < d; ++c) sys.coords[i * d + c] *= inv;
  }
  return sys;
}

AngularSystem sample_uniform_angles(std::size_t n, std::uint64_t seed, Model model,
                                    InteractionKernel kernel) {
  const ParticleSystem pts = sample_uniform_init(n, 2, seed, model, kernel);
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) angles[i] = std::atan2(pts.coords[2 * i + 1], pts.coords[2 * i]);
  return AngularSystem{AngleConfiguration(std::move(angles)), model, std::move(kernel), 0.0};
}

ParticleSystem to_particle_system(const AngularSystem& sys) {
  ParticleSystem out{2, std::vector<double>(2 * sys.size()), sys.model, sys.kernel, sys.time};
  for (std::size_t i = 0; i < sys.size(); ++i) {
    out.coords[2 * i] = std::cos(sys.angles[i]);
    out.coords[2 * i + 1] = std::sin(sys.angles[i]);
  }
  return out;
}

}  // namespace attnflow
