#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "attnflow/fourier.hpp"
#include "attnflow/kernel.hpp"

namespace attnflow {

// Uniform periodic grid on [0, 2pi) with M cells, node m at m * dx.
class PeriodicGrid {
 public:
  PeriodicGrid() : PeriodicGrid(64) {}
  explicit PeriodicGrid(int cells);
  int cells() const { return cells_; }
  double dx() const { return dx_; }
  double node(int m) const { return m * dx_; }

 private:
  int cells_;
  double dx_;
};

// Probability density with respect to d theta, sampled at grid nodes.
struct DensityField {
  PeriodicGrid grid;
  std::vector<double> values;
  double time = 0.0;

  double mass() const;
  double min_value() const;
};

DensityField uniform_density(const PeriodicGrid& grid);

// 1/(2pi) + amplitude * cos(k (theta - phase)).
DensityField cosine_density(const PeriodicGrid& grid, double amplitude, int k, double phase = 0.0);

// 1/(2pi) plus iid N(0, sigma^2) per cell, mean-corrected, clipped at zero
// and renormalized to unit mass.
DensityField white_noise_density(const PeriodicGrid& grid, double sigma, std::uint64_t seed);

// Errors when k_cut > M / 2.
FourierModes fourier_of_field(const DensityField& field, int k_cut);
FourierModes fourier_of_values(std::span<const double> values, double dx, int k_cut);
DensityField field_of_fourier(const FourierModes& modes, const PeriodicGrid& grid);

// || field - 1/(2pi) ||_{L^1}.
double l1_to_uniform(const DensityField& field);

enum class ConvolutionMethod {
  Auto,          // FFT when M is a power of two, cosine series otherwise
  Fft,           // discrete circular convolution through the FFT
  CosineSeries,  // O(M K) summation of the kernel's cosine series
  Direct,        // O(M^2) quadrature
};

// chi[nu](theta) = int h'(theta - omega) nu(omega) d omega.
std::vector<double> velocity_field(const DensityField& nu, const InteractionKernel& kernel,
                                   ConvolutionMethod method = ConvolutionMethod::Auto);

struct StepStats {
  double max_speed = 0.0;
  long clipped = 0;
};

// Finite-volume Lax-Friedrichs solver for d_t nu + d_theta(chi[nu] nu) = 0.
// Owns its FFT buffers, so one instance serves one run at a time.
class LaxFriedrichsSolver {
 public:
  LaxFriedrichsSolver(const PeriodicGrid& grid, const InteractionKernel& kernel,
                      ConvolutionMethod method = ConvolutionMethod::Auto);
  ~LaxFriedrichsSolver();
  LaxFriedrichsSolver(LaxFriedrichsSolver&&) noexcept;
  LaxFriedrichsSolver& operator=(LaxFriedrichsSolver&&) noexcept;

  // Advances nu by dt in place. Throws CflViolation when max|chi| dt / dx > 1
  // and NonFiniteState on NaN/Inf. Cells below -1e-12 are clipped to zero and
  // the field is rescaled to unit mass; the count is returned.
  StepStats step(DensityField& nu, double dt);

  const std::vector<double>& last_velocity() const { return chi_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<double> chi_;
};

DensityField lax_friedrichs_step(const DensityField& nu, const InteractionKernel& kernel,
                                 double dt);

// Default time step: 0.05 dx.
inline constexpr double kDefaultCflRatio = 0.05;

struct PdeDiagnostics {
  double time = 0.0;
  double mass = 0.0;
  double min_value = 0.0;
  double l1_to_uniform = 0.0;
  long clip_events = 0;
  // |nu_k| for k = 1..16 and the argmax.
  std::vector<double> mode_amplitudes;
  int dominant_mode = 0;
};

PdeDiagnostics diagnose(const DensityField& field, long clip_events = 0, int modes = 16);

struct PdeSnapshot {
  DensityField field;
  PdeDiagnostics diagnostics;
};

struct PdeOptions {
  double dt = 0.0;  // 0 selects cfl_ratio * dx
  double cfl_ratio = kDefaultCflRatio;
  ConvolutionMethod method = ConvolutionMethod::Auto;
  // Exit when ||nu - 1/(2pi)||_{L^1} > exit_delta, counted only after the
  // distance has been at or below exit_delta once.
  double exit_delta = 0.05;
  bool stop_at_exit = false;
  int diagnostic_modes = 16;

  double step_size(const PeriodicGrid& grid) const { return dt > 0.0 ? dt : cfl_ratio * grid.dx(); }
};

struct PdeRun {
  std::vector<PdeSnapshot> snapshots;
  std::optional<double> exit_time;
  std::optional<PdeSnapshot> at_exit;
  DensityField final_field;
  long steps = 0;
  long clip_events = 0;
};

// Repeated Lax-Friedrichs steps with uniform dt; snapshot t is taken at step
// round(t / dt). The initial state is always the first snapshot.
PdeRun simulate_pde(const DensityField& nu0, const InteractionKernel& kernel, double horizon,
                    std::span<const double> snapshot_times, const PdeOptions& options = {});

// Fourier-collocation solver with classical RK4 for smooth solutions, used as
// the resolved reference for perturbative comparisons. M must be a power of two.
class SpectralSolver {
 public:
  SpectralSolver(const PeriodicGrid& grid, const InteractionKernel& kernel);
  ~SpectralSolver();
  SpectralSolver(SpectralSolver&&) noexcept;
  SpectralSolver& operator=(SpectralSolver&&) noexcept;

  void step(DensityField& nu, double dt);
  // Integrates to nu.time + duration in equal steps no larger than max_dt.
  void advance(DensityField& nu, double duration, double max_dt);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Mode-wise linear evolution (rho_t)_k = (rho_0)_k e^{gamma_k t}.
FourierModes linear_solution(const FourierModes& rho0, const GegenbauerSpectrum& spectrum,
                             double t);

}  // namespace attnflow
