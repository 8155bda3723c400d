#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "attnflow/geometry.hpp"
#include "attnflow/kernel.hpp"

namespace attnflow {

// SA: softmax weights e^{beta<x_i,x_j>} / Z_i. USA: uniform 1/N weights.
enum class Model { SA, USA };

// N tokens on S^{d-1}, stored row-major (N x d).
struct ParticleSystem {
  std::size_t dim = 2;
  std::vector<double> coords;
  Model model = Model::USA;
  InteractionKernel kernel = InteractionKernel::transformer(1.0);
  double time = 0.0;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> position(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }
};

// d = 2 fast path: the same dynamics in angular coordinates.
struct AngularSystem {
  AngleConfiguration angles;
  Model model = Model::USA;
  InteractionKernel kernel = InteractionKernel::transformer(1.0);
  double time = 0.0;

  std::size_t size() const { return angles.size(); }
};

enum class Scheme { Euler, Heun };

// Pair-sum (O(N^2)) or truncated cosine-series (O(N K)) force evaluation.
// The series is exact to roundoff for the transformer kernel at the default
// truncation; Auto picks it for N above a threshold on the angular path.
enum class ForceMethod { Auto, Direct, Spectral };

struct IntegratorConfig {
  double dt = 5e-4;
  bool renormalize_every_step = true;
  std::vector<double> snapshot_times;
  std::uint64_t rng_seed = 0;
  Scheme scheme = Scheme::Euler;
  ForceMethod force = ForceMethod::Auto;
  // Workers for the loop over particles. Results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

std::vector<double> rhs_usa(const ParticleSystem& sys, unsigned threads = 1);
std::vector<double> rhs_sa(const ParticleSystem& sys, unsigned threads = 1);
std::vector<double> rhs(const ParticleSystem& sys, unsigned threads = 1);

// theta_dot_i = (1/N) sum_j h'(theta_i - theta_j) for USA; SA divides by the
// softmax partition function instead of N.
std::vector<double> angular_rhs(const AngleConfiguration& cfg, const InteractionKernel& kernel,
                                Model model = Model::USA, unsigned threads = 1);

// Same velocities through the cosine series of h with `modes` terms.
std::vector<double> angular_rhs_spectral(const AngleConfiguration& cfg,
                                         const InteractionKernel& kernel, Model model,
                                         int modes);

ParticleSystem step_euler(const ParticleSystem& sys, const IntegratorConfig& cfg);
AngularSystem step_euler(const AngularSystem& sys, const IntegratorConfig& cfg);

struct ParticleSnapshot {
  double time = 0.0;
  std::vector<double> coords;  // angles for d = 2 runs, flattened positions otherwise
};

struct Trajectory {
  std::size_t dim = 2;
  bool angular = false;
  std::vector<ParticleSnapshot> snapshots;
  double final_time = 0.0;
  bool stopped_early = false;
};

// Called after every step with the current state; return false to stop.
using AngularObserver = std::function<bool(const AngularSystem&)>;
using ParticleObserver = std::function<bool(const ParticleSystem&)>;

// Integrates to `horizon` with uniform steps; snapshot t is taken at step
// round(t / dt). Always records the initial state.
Trajectory simulate(AngularSystem& sys, const IntegratorConfig& cfg, double horizon,
                    const AngularObserver& observer = {});
Trajectory simulate(ParticleSystem& sys, const IntegratorConfig& cfg, double horizon,
                    const ParticleObserver& observer = {});

// Separation omega = theta_2 - theta_1 of the two-particle SA system at beta = 1.
struct OmegaTrajectory {
  std::vector<double> times;
  std::vector<double> omega;
};
OmegaTrajectory two_particle_omega(double omega0, double horizon, double dt);

// Contraction rates for omega' <= -rate sin(omega). The softmax weight
// e^{cos w} / (e + e^{cos w}) is bounded below by 1/(e^2 + 1), attained at
// w = pi, so only the second rate holds on all of [0, pi]; the first is valid
// for cos(omega) >= ln(e / (e^2 - 1)).
inline const double kTwoParticleNominalRate = 2.0 / std::exp(2.0);
inline const double kTwoParticleRate = 2.0 / (std::exp(2.0) + 1.0);

// Comparison solution 2 arccot(cot(omega0 / 2) e^{rate t}).
double two_particle_upper_bound(double omega0, double t, double rate = kTwoParticleRate);

// iid uniform on S^{d-1} from normalized standard Gaussians.
ParticleSystem sample_uniform_init(std::size_t n, std::size_t d, std::uint64_t seed,
                                   Model model = Model::USA,
                                   InteractionKernel kernel = InteractionKernel::transformer(1.0));

// The d = 2 sample for the same seed, as angles.
AngularSystem sample_uniform_angles(std::size_t n, std::uint64_t seed, Model model = Model::USA,
                                    InteractionKernel kernel = InteractionKernel::transformer(1.0));

ParticleSystem to_particle_system(const AngularSystem& sys);

}  // namespace attnflow
