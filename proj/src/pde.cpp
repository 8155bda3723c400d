#include "attnflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"

namespace attnflow {

namespace {

constexpr double kUniformDensity = 1.0 / kTwoPi;
constexpr double kClipLevel = -1e-12;

// cos/sin of 2 pi j / M, indexed by j mod M.
struct Twiddles {
  explicit Twiddles(int m) : cos_(m), sin_(m) {
    for (int j = 0; j < m; ++j) {
      cos_[j] = std::cos(kTwoPi * j / m);
      sin_[j] = std::sin(kTwoPi * j / m);
    }
  }
  std::vector<double> cos_, sin_;
};

// Direct DFT of the lowest modes, g_k = dx sum_m g_m e^{-ik theta_m}.
std::vector<std::complex<double>> direct_modes(std::span<const double> values, double dx,
                                               int k_cut, const Twiddles& tw) {
  const int m = static_cast<int>(values.size());
  std::vector<std::complex<double>> out(k_cut + 1);
  for (int k = 0; k <= k_cut; ++k) {
    double re = 0.0, im = 0.0;
    long long idx = 0;
    for (int j = 0; j < m; ++j) {
      re += values[j] * tw.cos_[idx];
      im -= values[j] * tw.sin_[idx];
      idx += k;
      if (idx >= m) idx -= m;
    }
    out[k] = {dx * re, dx * im};
  }
  return out;
}

// Circular convolution with h' on a fixed grid.
class Convolver {
 public:
  Convolver(const PeriodicGrid& grid, const InteractionKernel& kernel, ConvolutionMethod method)
      : grid_(grid), method_(method) {
    const int m = grid.cells();
    if (method_ == ConvolutionMethod::Auto) {
      method_ = is_power_of_two(m) ? ConvolutionMethod::Fft : ConvolutionMethod::CosineSeries;
    }
    switch (method_) {
      case ConvolutionMethod::Fft: {
        fft_.emplace(m);
        std::vector<double> hp(m);
        for (int j = 0; j < m; ++j) hp[j] = kernel.h_prime(grid.node(j));
        kernel_hat_.resize(m / 2 + 1);
        fft_->forward(hp, kernel_hat_);
        for (auto& c : kernel_hat_) c *= grid.dx() / m;
        spec_.resize(m / 2 + 1);
        break;
      }
      case ConvolutionMethod::CosineSeries: {
        const int K = std::min(kernel.force_truncation(), m / 2);
        coeffs_ = kernel.cosine_coeffs(K);
        twiddles_.emplace(m);
        break;
      }
      case ConvolutionMethod::Direct: {
        hp_table_.resize(m);
        for (int j = 0; j < m; ++j) hp_table_[j] = kernel.h_prime(grid.node(j));
        break;
      }
      case ConvolutionMethod::Auto:
        break;
    }
  }

  void apply(std::span<const double> nu, std::span<double> out) {
    const int m = grid_.cells();
    const double dx = grid_.dx();
    switch (method_) {
      case ConvolutionMethod::Fft:
        fft_->forward(nu, spec_);
        for (std::size_t k = 0; k < spec_.size(); ++k) spec_[k] *= kernel_hat_[k];
        fft_->inverse(spec_, out);
        return;
      case ConvolutionMethod::CosineSeries: {
        const int K = static_cast<int>(coeffs_.size()) - 1;
        const auto modes = direct_modes(nu, dx, K, *twiddles_);
        std::fill(out.begin(), out.end(), 0.0);
        for (int k = 1; k <= K; ++k) {
          const double w = k * coeffs_[k];
          const double re = modes[k].real(), im = modes[k].imag();
          long long idx = 0;
          // -k a_k Im(nu_k e^{ik theta_m})
          for (int j = 0; j < m; ++j) {
            out[j] -= w * (re * twiddles_->sin_[idx] + im * twiddles_->cos_[idx]);
            idx += k;
            if (idx >= m) idx -= m;
          }
        }
        return;
      }
      case ConvolutionMethod::Direct:
        for (int i = 0; i < m; ++i) {
          double s = 0.0;
          for (int j = 0; j < m; ++j) {
            int diff = i - j;
            if (diff < 0) diff += m;
            s += hp_table_[diff] * nu[j];
          }
          out[i] = dx * s;
        }
        return;
      case ConvolutionMethod::Auto:
        break;
    }
  }

 private:
  PeriodicGrid grid_;
  ConvolutionMethod method_;
  std::optional<RealFft> fft_;
  std::vector<std::complex<double>> kernel_hat_;
  std::vector<std::complex<double>> spec_;
  std::vector<double> coeffs_;
  std::optional<Twiddles> twiddles_;
  std::vector<double> hp_table_;
};

void check_finite_field(std::span<const double> values, double time) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "non-finite density at t=" << time << ", cell " << i;
      throw NonFiniteState(os.str(), time, i);
    }
  }
}

double mass_of(std::span<const double> values, double dx) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * dx;
}

}  // namespace

PeriodicGrid::PeriodicGrid(int cells) : cells_(cells), dx_(kTwoPi / cells) {
  if (cells < 64) throw Error("PeriodicGrid requires at least 64 cells");
}

double DensityField::mass() const { return mass_of(values, grid.dx()); }

double DensityField::min_value() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

DensityField uniform_density(const PeriodicGrid& grid) {
  return {grid, std::vector<double>(grid.cells(), kUniformDensity), 0.0};
}

DensityField cosine_density(const PeriodicGrid& grid, double amplitude, int k, double phase) {
  DensityField f = uniform_density(grid);
  for (int m = 0; m < grid.cells(); ++m) {
    f.values[m] += amplitude * std::cos(k * (grid.node(m) - phase));
  }
  return f;
}

DensityField white_noise_density(const PeriodicGrid& grid, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw Error("white_noise_density: negative sigma");
  DensityField f = uniform_density(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : f.values) v += sigma * gauss(rng);
  const double excess = (f.mass() - 1.0) / kTwoPi;
  for (double& v : f.values) v = std::max(0.0, v - excess);
  const double mass = f.mass();
  for (double& v : f.values) v /= mass;
  return f;
}

FourierModes fourier_of_values(std::span<const double> values, double dx, int k_cut) {
  const int m = static_cast<int>(values.size());
  if (k_cut < 0 || k_cut > m / 2) throw Error("fourier_of_values: k_cut must lie in [0, M/2]");
  if (k_cut <= 32) return FourierModes(direct_modes(values, dx, k_cut, Twiddles(m)));
  RealFft fft(m);
  std::vector<std::complex<double>> spec(m / 2 + 1);
  fft.forward(values, spec);
  spec.resize(k_cut + 1);
  for (auto& c : spec) c *= dx;
  return FourierModes(std::move(spec));
}

FourierModes fourier_of_field(const DensityField& field, int k_cut) {
  return fourier_of_values(field.values, field.grid.dx(), k_cut);
}

DensityField field_of_fourier(const FourierModes& modes, const PeriodicGrid& grid) {
  const int m = grid.cells();
  if (modes.k_cut() > m / 2) throw Error("field_of_fourier: k_cut exceeds M/2");
  std::vector<std::complex<double>> spec(m / 2 + 1);
  for (int k = 0; k <= modes.k_cut(); ++k) spec[k] = modes[k] / kTwoPi;
  DensityField f{grid, std::vector<double>(m), 0.0};
  RealFft fft(m);
  fft.inverse(spec, f.values);
  return f;
}

double l1_to_uniform(const DensityField& field) {
  double s = 0.0;
  for (double v : field.values) s += std::abs(v - kUniformDensity);
  return s * field.grid.dx();
}

std::vector<double> velocity_field(const DensityField& nu, const InteractionKernel& kernel,
                                   ConvolutionMethod method) {
  Convolver conv(nu.grid, kernel, method);
  std::vector<double> out(nu.grid.cells());
  conv.apply(nu.values, out);
  return out;
}

struct LaxFriedrichsSolver::Impl {
  Impl(const PeriodicGrid& g, const InteractionKernel& kernel, ConvolutionMethod method)
      : grid(g), conv(g, kernel, method), flux(g.cells()), next(g.cells()) {}
  PeriodicGrid grid;
  Convolver conv;
  std::vector<double> flux, next;
};

LaxFriedrichsSolver::LaxFriedrichsSolver(const PeriodicGrid& grid, const InteractionKernel& kernel,
                                         ConvolutionMethod method)
    : impl_(std::make_unique<Impl>(grid, kernel, method)), chi_(grid.cells()) {}
LaxFriedrichsSolver::~LaxFriedrichsSolver() = default;
LaxFriedrichsSolver::LaxFriedrichsSolver(LaxFriedrichsSolver&&) noexcept = default;
LaxFriedrichsSolver& LaxFriedrichsSolver::operator=(LaxFriedrichsSolver&&) noexcept = default;

StepStats LaxFriedrichsSolver::step(DensityField& nu, double dt) {
  const int m = impl_->grid.cells();
  if (nu.grid.cells() != m) throw DimensionMismatch("LaxFriedrichsSolver: grid mismatch");
  if (!(dt > 0.0)) throw Error("LaxFriedrichsSolver: dt must be positive");
  const double dx = impl_->grid.dx();
  impl_->conv.apply(nu.values, chi_);
  StepStats stats;
  for (int j = 0; j < m; ++j) stats.max_speed = std::max(stats.max_speed, std::abs(chi_[j]));
  if (stats.max_speed * dt / dx > 1.0) {
    const double required = dx / stats.max_speed;
    std::ostringstream os;
    os << "CFL violated: max|chi|=" << stats.max_speed << " needs dt <= " << required
       << " (dt=" << dt << ")";
    throw CflViolation(os.str(), stats.max_speed, required);
  }
  auto& f = impl_->flux;
  auto& next = impl_->next;
  for (int j = 0; j < m; ++j) f[j] = chi_[j] * nu.values[j];
  const double lambda = dt / (2.0 * dx);
  for (int j = 0; j < m; ++j) {
    const int jp = j + 1 == m ? 0 : j + 1;
    const int jm = j == 0 ? m - 1 : j - 1;
    next[j] = 0.5 * (nu.values[jp] + nu.values[jm]) - lambda * (f[jp] - f[jm]);
  }
  check_finite_field(next, nu.time + dt);
  for (double& v : next) {
    if (v < kClipLevel) {
      v = 0.0;
      ++stats.clipped;
    }
  }
  if (stats.clipped > 0) {
    const double mass = mass_of(next, dx);
    for (double& v : next) v /= mass;
  }
  nu.values.swap(next);
  nu.time += dt;
  return stats;
}

DensityField lax_friedrichs_step(const DensityField& nu, const InteractionKernel& kernel,
                                 double dt) {
  LaxFriedrichsSolver solver(nu.grid, kernel);
  DensityField out = nu;
  solver.step(out, dt);
  return out;
}

PdeDiagnostics diagnose(const DensityField& field, long clip_events, int modes) {
  PdeDiagnostics d;
  d.time = field.time;
  d.mass = field.mass();
  d.min_value = field.min_value();
  d.l1_to_uniform = l1_to_uniform(field);
  d.clip_events = clip_events;
  const int K = std::min(modes, field.grid.cells() / 2);
  const FourierModes f = fourier_of_field(field, K);
  d.mode_amplitudes.resize(K);
  double best = -1.0;
  for (int k = 1; k <= K; ++k) {
    d.mode_amplitudes[k - 1] = std::abs(f[k]);
    if (d.mode_amplitudes[k - 1] > best) {
      best = d.mode_amplitudes[k - 1];
      d.dominant_mode = k;
    }
  }
  return d;
}

PdeRun simulate_pde(const DensityField& nu0, const InteractionKernel& kernel, double horizon,
                    std::span<const double> snapshot_times, const PdeOptions& options) {
  if (horizon < 0.0) throw Error("simulate_pde: negative horizon");
  const double dt = options.step_size(nu0.grid);
  const long long total = std::llround(horizon / dt);
  std::vector<long long> snaps;
  for (double t : snapshot_times) {
    const long long s = std::llround(t / dt);
    if (s > 0 && s <= total && (snaps.empty() || snaps.back() < s)) snaps.push_back(s);
  }
  PdeRun run;
  DensityField nu = nu0;
  const double t0 = nu.time;
  run.snapshots.push_back({nu, diagnose(nu, 0, options.diagnostic_modes)});
  LaxFriedrichsSolver solver(nu.grid, kernel, options.method);
  bool armed = l1_to_uniform(nu) <= options.exit_delta;
  std::size_t next_snap = 0;
  for (long long step = 1; step <= total; ++step) {
    const StepStats stats = solver.step(nu, dt);
    nu.time = t0 + static_cast<double>(step) * dt;
    run.clip_events += stats.clipped;
    run.steps = step;
    if (next_snap < snaps.size() && snaps[next_snap] == step) {
      run.snapshots.push_back({nu, diagnose(nu, run.clip_events, options.diagnostic_modes)});
      ++next_snap;
    }
    if (!run.exit_time) {
      const double dist = l1_to_uniform(nu);
      if (dist <= options.exit_delta) {
        armed = true;
      } else if (armed) {
        run.exit_time = nu.time;
        run.at_exit = PdeSnapshot{nu, diagnose(nu, run.clip_events, options.diagnostic_modes)};
        if (options.stop_at_exit) break;
      }
    }
  }
  run.final_field = std::move(nu);
  return run;
}

struct SpectralSolver::Impl {
  Impl(const PeriodicGrid& g, const InteractionKernel& kernel)
      : grid(g), conv(g, kernel, ConvolutionMethod::Fft), fft(g.cells()) {
    const int m = g.cells();
    chi.resize(m);
    flux.resize(m);
    spec.resize(m / 2 + 1);
    for (int i = 0; i < 4; ++i) stages[i].resize(m);
    work.resize(m);
  }

  // out = -d_theta(chi[nu] nu), derivative taken spectrally with 2/3 truncation.
  void rhs(std::span<const double> nu, std::span<double> out) {
    const int m = grid.cells();
    conv.apply(nu, chi);
    for (int j = 0; j < m; ++j) flux[j] = chi[j] * nu[j];
    fft.forward(flux, spec);
    const int cutoff = m / 3;
    for (int k = 0; k <= m / 2; ++k) {
      spec[k] = k > cutoff ? std::complex<double>{} : spec[k] * std::complex<double>(0.0, -k) / double(m);
    }
    fft.inverse(spec, out);
  }

  PeriodicGrid grid;
  Convolver conv;
  RealFft fft;
  std::vector<double> chi, flux, work;
  std::vector<std::complex<double>> spec;
  std::vector<double> stages[4];
};

SpectralSolver::SpectralSolver(const PeriodicGrid& grid, const InteractionKernel& kernel) {
  if (!is_power_of_two(grid.cells())) throw Error("SpectralSolver requires a power-of-two grid");
  impl_ = std::make_unique<Impl>(grid, kernel);
}
SpectralSolver::~SpectralSolver() = default;
SpectralSolver::SpectralSolver(SpectralSolver&&) noexcept = default;
SpectralSolver& SpectralSolver::operator=(SpectralSolver&&) noexcept = default;

void SpectralSolver::step(DensityField& nu, double dt) {
  auto& im = *impl_;
  const int m = im.grid.cells();
  auto& k1 = im.stages[0];
  auto& k2 = im.stages[1];
  auto& k3 = im.stages[2];
  auto& k4 = im.stages[3];
  auto& w = im.work;
  im.rhs(nu.values, k1);
  for (int j = 0; j < m; ++j) w[j] = nu.values[j] + 0.5 * dt * k1[j];
  im.rhs(w, k2);
  for (int j = 0; j < m; ++j) w[j] = nu.values[j] + 0.5 * dt * k2[j];
  im.rhs(w, k3);
  for (int j = 0; j < m; ++j) w[j] = nu.values[j] + dt * k3[j];
  im.rhs(w, k4);
  for (int j = 0; j < m; ++j) {
    nu.values[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  check_finite_field(nu.values, nu.time + dt);
  nu.time += dt;
}

void SpectralSolver::advance(DensityField& nu, double duration, double max_dt) {
  if (duration <= 0.0) return;
  const long long n = static_cast<long long>(std::ceil(duration / max_dt - 1e-12));
  const double h = duration / static_cast<double>(n);
  const double t_end = nu.time + duration;
  for (long long s = 0; s < n; ++s) step(nu, h);
  nu.time = t_end;
}

FourierModes linear_solution(const FourierModes& rho0, const GegenbauerSpectrum& spectrum,
                             double t) {
  if (t < 0.0) throw Error("linear_solution: negative time");
  if (rho0.k_cut() > spectrum.k_cut()) {
    throw Error("linear_solution: spectrum cutoff below the modes' cutoff");
  }
  std::vector<std::complex<double>> out(rho0.nonnegative().begin(), rho0.nonnegative().end());
  for (int k = 0; k <= rho0.k_cut(); ++k) out[k] *= std::exp(spectrum.gamma(k) * t);
  return FourierModes(std::move(out));
}

}  // namespace attnflow
