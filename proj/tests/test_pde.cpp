#include <cmath>
#include <random>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/pde.hpp"
#include "doctest.h"

using namespace attnflow;

namespace {

// Reference convolution: midpoint quadrature of h'(theta - omega) nu(omega).
std::vector<double> quadrature_velocity(const DensityField& nu, const InteractionKernel& k) {
  const int m = nu.grid.cells();
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += k.h_prime(nu.grid.node(i) - nu.grid.node(j)) * nu.values[j];
    out[i] = s * nu.grid.dx();
  }
  return out;
}

// Projection of a grid function onto cos(k theta) and sin(k theta).
std::pair<double, double> project(const std::vector<double>& f, const PeriodicGrid& g, int k) {
  double c = 0.0, s = 0.0;
  for (int m = 0; m < g.cells(); ++m) {
    c += f[m] * std::cos(k * g.node(m));
    s += f[m] * std::sin(k * g.node(m));
  }
  return {c * g.dx() / kPi, s * g.dx() / kPi};
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("grid and fields") {
  CHECK_THROWS_AS(PeriodicGrid(32), Error);
  const PeriodicGrid g(1000);
  CHECK(g.dx() * g.cells() == doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(uniform_density(g).mass() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(cosine_density(g, 0.05, 3, 0.4).mass() == doctest::Approx(1.0).epsilon(1e-13));
  const auto noise = white_noise_density(g, 0.01, 5);
  CHECK(std::abs(noise.mass() - 1.0) <= 1e-10);
  CHECK(noise.min_value() >= 0.0);
  CHECK(white_noise_density(g, 0.01, 5).values == noise.values);
  const auto heavy = white_noise_density(g, 0.5, 5);
  CHECK(std::abs(heavy.mass() - 1.0) <= 1e-10);
  CHECK(heavy.min_value() >= 0.0);
}

TEST_CASE("velocity of the uniform density vanishes") {
  const auto k = InteractionKernel::transformer(5.0);
  for (int m : {1024, 1000}) {
    const auto chi = velocity_field(uniform_density(PeriodicGrid(m)), k);
    CHECK(max_abs(chi) <= 1e-10);
  }
}

TEST_CASE("velocity of a single-cell spike is the kernel derivative") {
  const PeriodicGrid g(512);
  const auto k = InteractionKernel::transformer(3.0);
  DensityField nu{g, std::vector<double>(512, 0.0), 0.0};
  const int m0 = 100;
  nu.values[m0] = 1.0 / g.dx();
  for (auto method : {ConvolutionMethod::Fft, ConvolutionMethod::Direct, ConvolutionMethod::CosineSeries}) {
    const auto chi = velocity_field(nu, k, method);
    for (int m = 0; m < 512; ++m) {
      CHECK(std::abs(chi[m] - k.h_prime(g.node(m) - g.node(m0))) <= 1e-9);
    }
    CHECK(std::abs(chi[m0]) <= 1e-9);
    CHECK(std::abs(chi[m0 + 256]) <= 1e-9);
    // particles just ahead of the spike are pulled back toward it
    CHECK(chi[m0 + 10] < 0.0);
    CHECK(chi[m0 - 10] > 0.0);
  }
}

TEST_CASE("velocity of a cosine perturbation is a pure sine mode") {
  const PeriodicGrid g(1024);
  const double a = 1e-3;
  for (double beta : {2.0, 5.0}) {
    const auto k = InteractionKernel::transformer(beta);
    const auto coeffs = bessel_coeffs_d2(beta, 40).w_hat;
    for (int mode : {1, 3, 5}) {
      const auto nu = cosine_density(g, a, mode);
      const auto ref = quadrature_velocity(nu, k);
      const auto chi = velocity_field(nu, k);
      for (int m = 0; m < 1024; ++m) CHECK(std::abs(chi[m] - ref[m]) <= 1e-10);
      // amplitude -k pi a W_hat_k on sin(k theta), nothing else
      const auto [c, s] = project(ref, g, mode);
      CHECK(std::abs(c) <= 1e-12);
      CHECK(s == doctest::Approx(-mode * kPi * a * coeffs[mode]).epsilon(1e-10));
      std::vector<double> residual(ref);
      for (int m = 0; m < 1024; ++m) residual[m] -= s * std::sin(mode * g.node(m));
      CHECK(max_abs(residual) <= 1e-8 * std::abs(s));
    }
  }
}

TEST_CASE("convolution methods agree") {
  const auto k = InteractionKernel::transformer(7.0);
  for (int m : {1024, 1000}) {
    const PeriodicGrid g(m);
    const auto nu = white_noise_density(g, 0.05, 17);
    const auto direct = velocity_field(nu, k, ConvolutionMethod::Direct);
    const auto series = velocity_field(nu, k, ConvolutionMethod::CosineSeries);
    for (int i = 0; i < m; ++i) CHECK(std::abs(direct[i] - series[i]) <= 1e-8);
    if (is_power_of_two(m)) {
      const auto fft = velocity_field(nu, k, ConvolutionMethod::Fft);
      for (int i = 0; i < m; ++i) CHECK(std::abs(direct[i] - fft[i]) <= 1e-8);
    }
  }
}

TEST_CASE("Fourier transforms") {
  const PeriodicGrid g(256);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  DensityField f{g, std::vector<double>(256), 0.0};
  for (double& v : f.values) v = n(rng);
  const auto modes = fourier_of_field(f, 128);
  const auto back = field_of_fourier(modes, g);
  for (int m = 0; m < 256; ++m) CHECK(std::abs(back.values[m] - f.values[m]) <= 1e-12);
  // direct and FFT paths give the same low modes
  const auto low = fourier_of_field(f, 20);
  for (int k = 0; k <= 20; ++k) CHECK(std::abs(low[k] - modes[k]) <= 1e-12);

  const auto uni = fourier_of_field(uniform_density(g), 128);
  CHECK(uni[0].real() == doctest::Approx(1.0));
  for (int k = 1; k <= 128; ++k) CHECK(std::abs(uni[k]) <= 1e-14);

  DensityField c3{g, std::vector<double>(256), 0.0};
  for (int m = 0; m < 256; ++m) c3.values[m] = std::cos(3 * g.node(m));
  const auto m3 = fourier_of_field(c3, 128);
  for (int k = 0; k <= 128; ++k) {
    if (k == 3) {
      CHECK(m3[k].real() == doctest::Approx(kPi));
      CHECK(m3[-k] == std::conj(m3[k]));
    } else {
      CHECK(std::abs(m3[k]) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(fourier_of_field(f, 129), Error);
  CHECK_THROWS_AS(field_of_fourier(FourierModes(std::vector<std::complex<double>>(200)), g), Error);
}

TEST_CASE("Lax-Friedrichs: uniform state, mass, CFL") {
  const PeriodicGrid g(2048);
  const auto k = InteractionKernel::transformer(5.0);
  const auto uni = uniform_density(g);
  const auto next = lax_friedrichs_step(uni, k, 0.05 * g.dx());
  for (int m = 0; m < 2048; ++m) CHECK(std::abs(next.values[m] - uni.values[m]) <= 1e-12);

  LaxFriedrichsSolver solver(g, k);
  auto nu = white_noise_density(g, 0.01, 3);
  for (int s = 0; s < 10000; ++s) solver.step(nu, 0.05 * g.dx());
  CHECK(std::abs(nu.mass() - 1.0) <= 1e-9);

  auto bumpy = cosine_density(g, 0.1, 2);
  try {
    solver.step(bumpy, 1.0);
    FAIL("expected a CFL violation");
  } catch (const CflViolation& e) {
    CHECK(e.max_speed() > 0.0);
    CHECK(e.required_dt() == doctest::Approx(g.dx() / e.max_speed()));
    CHECK(std::string(e.what()).find("max|chi|") != std::string::npos);
  }
}

TEST_CASE("Lax-Friedrichs preserves k-periodicity") {
  const PeriodicGrid g(2048);
  const auto k = InteractionKernel::transformer(5.0);
  auto nu = uniform_density(g);
  for (int m = 0; m < 2048; ++m) {
    nu.values[m] += 0.01 * std::cos(3 * g.node(m)) + 0.004 * std::sin(6 * g.node(m) + 0.3);
  }
  LaxFriedrichsSolver solver(g, k);
  for (int s = 0; s < 1000; ++s) solver.step(nu, 0.05 * g.dx());
  const auto modes = fourier_of_field(nu, 64);
  for (int j = 1; j <= 64; ++j) {
    if (j % 3) CHECK(std::abs(modes[j]) < 1e-10);
  }
  CHECK(std::abs(modes[3]) > 1e-2);
}

TEST_CASE("clipping counts and renormalizes") {
  // LF is positivity preserving under its CFL limit, so negative cells only
  // arise from negative input; they are clipped and the mass restored.
  const PeriodicGrid g(256);
  const auto k = InteractionKernel::transformer(1.0);
  DensityField nu = uniform_density(g);
  for (int m = 100; m < 110; ++m) nu.values[m] = -1e-3;
  LaxFriedrichsSolver solver(g, k);
  const auto stats = solver.step(nu, 0.05 * g.dx());
  CHECK(stats.clipped >= 8);
  CHECK(nu.min_value() >= 0.0);
  CHECK(std::abs(nu.mass() - 1.0) <= 1e-12);
  // a smooth nonnegative state is never clipped
  auto smooth = cosine_density(g, 1.0 / kTwoPi, 1);
  long clipped = 0;
  for (int s = 0; s < 200; ++s) clipped += solver.step(smooth, 0.05 * g.dx()).clipped;
  CHECK(clipped == 0);
  CHECK(smooth.min_value() >= 0.0);
}

TEST_CASE("NaN detection") {
  const PeriodicGrid g(128);
  auto nu = uniform_density(g);
  nu.values[5] = std::nan("");
  LaxFriedrichsSolver solver(g, InteractionKernel::transformer(2.0), ConvolutionMethod::Direct);
  CHECK_THROWS_AS(solver.step(nu, 1e-4), NonFiniteState);
}

TEST_CASE("simulate_pde: horizon zero and diagnostics") {
  const PeriodicGrid g(512);
  const auto k = InteractionKernel::transformer(5.0);
  const auto nu0 = white_noise_density(g, 0.01, 8);
  auto run = simulate_pde(nu0, k, 0.0, {});
  REQUIRE(run.snapshots.size() == 1);
  CHECK(run.final_field.values == nu0.values);
  CHECK(run.steps == 0);

  const std::vector<double> times{0.05, 0.1};
  run = simulate_pde(nu0, k, 0.1, times);
  REQUIRE(run.snapshots.size() == 3);
  // snapshot t is taken at step round(t / dt)
  const double dt = 0.05 * g.dx();
  CHECK(std::abs(run.snapshots[2].diagnostics.time - 0.1) <= 0.5 * dt + 1e-12);
  CHECK(run.snapshots[2].diagnostics.mode_amplitudes.size() == 16);
  CHECK(std::abs(run.snapshots[2].diagnostics.mass - 1.0) <= 1e-10);
}

TEST_CASE("simulate_pde: unperturbed uniform never exits") {
  const PeriodicGrid g(256);
  PdeOptions opt;
  opt.stop_at_exit = true;
  const auto run = simulate_pde(uniform_density(g), InteractionKernel::transformer(5.0), 1.0, {}, opt);
  CHECK_FALSE(run.exit_time.has_value());
  CHECK(l1_to_uniform(run.final_field) <= 1e-10);
}

TEST_CASE("linear_solution") {
  const auto spec = spectrum_for(InteractionKernel::transformer(5.0), 2);
  std::vector<std::complex<double>> v(8);
  v[3] = {0.01, 0.002};
  v[5] = {-0.003, 0.0};
  const FourierModes rho(v);
  const auto same = linear_solution(rho, spec, 0.0);
  for (int k = 0; k <= 7; ++k) CHECK(same[k] == rho[k]);
  const double t2 = std::log(2.0) / spec.gamma_max();
  const auto doubled = linear_solution(rho, spec, t2);
  CHECK(std::abs(doubled[3]) == doctest::Approx(2.0 * std::abs(rho[3])).epsilon(1e-12));
  std::vector<std::complex<double>> w(8);
  w[2] = {0.5, -0.1};
  const FourierModes other(w);
  const auto sum = linear_solution(rho + other, spec, 0.3);
  const auto parts = linear_solution(rho, spec, 0.3) + linear_solution(other, spec, 0.3);
  for (int k = 0; k <= 7; ++k) CHECK(sum[k] == parts[k]);
  CHECK_THROWS_AS(linear_solution(rho, spec, -1.0), Error);
}

TEST_CASE("small-amplitude growth matches gamma_k") {
  // Linearized discrete LF growth factor per step is
  // cos(k dx) + (dt/dx) sin(k dx) gamma_k / k, so the measured rate is within
  // the scheme's diffusion k^2 dx^2/(2 dt) of gamma_k.
  const double beta = 7.0;
  const auto k = InteractionKernel::transformer(beta);
  const auto spec = spectrum_for(k, 2);
  const PeriodicGrid g(8192);
  for (int mode : {2, 4}) {
    auto nu = cosine_density(g, 1e-6 / kPi, mode);
    LaxFriedrichsSolver solver(g, k);
    const double dt = 0.05 * g.dx();
    std::vector<double> ts, logs;
    while (true) {
      const double amp = std::abs(fourier_of_field(nu, mode)[mode]);
      if (amp >= 1e-4) break;
      ts.push_back(nu.time);
      logs.push_back(std::log(amp));
      solver.step(nu, dt);
    }
    const double n = ts.size();
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sl += logs[i];
      stt += ts[i] * ts[i];
      stl += ts[i] * logs[i];
    }
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    CHECK(slope == doctest::Approx(spec.gamma(mode)).epsilon(0.02));
  }
}

TEST_CASE("spectral solver: conservation and linear growth") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const PeriodicGrid g(256);
  CHECK_THROWS_AS(SpectralSolver(PeriodicGrid(100), k), Error);
  SpectralSolver solver(g, k);
  const double a = 1e-10;
  auto nu = cosine_density(g, a / kPi, 3);
  solver.advance(nu, 0.5, 1e-3);
  CHECK(nu.time == doctest::Approx(0.5));
  CHECK(std::abs(nu.mass() - 1.0) <= 1e-13);
  const double amp = std::abs(fourier_of_field(nu, 8)[3]);
  CHECK(amp == doctest::Approx(a * std::exp(spec.gamma(3) * 0.5)).epsilon(1e-6));
}

TEST_CASE("spectral and Lax-Friedrichs solutions agree on a smooth run") {
  const auto k = InteractionKernel::transformer(3.0);
  const PeriodicGrid fine(8192), coarse(256);
  auto a = cosine_density(fine, 0.02, 2, 0.3);
  auto b = cosine_density(coarse, 0.02, 2, 0.3);
  LaxFriedrichsSolver lf(fine, k);
  const double dt = 0.05 * fine.dx();
  const long steps = std::lround(0.3 / dt);
  for (long s = 0; s < steps; ++s) lf.step(a, dt);
  SpectralSolver sp(coarse, k);
  sp.advance(b, steps * dt, 1e-3);
  const auto ma = fourier_of_field(a, 8), mb = fourier_of_field(b, 8);
  CHECK(std::abs(ma[2] - mb[2]) <= 0.01 * std::abs(mb[2]));
}

TEST_CASE("quadratic error of the linear approximation") {
  // || nonlinear - linear || grows like e^{2 gamma_max t} for a = 1e-3 on k_max.
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const int km = spec.k_max();
  const double gm = spec.gamma_max();
  const PeriodicGrid g(256);
  SpectralSolver solver(g, k);
  auto nu = cosine_density(g, 1e-3 / kPi, km);
  const auto rho0 = fourier_of_field(nu, 128);
  std::vector<double> ts, logs;
  const double t_end = std::log(10.0) / gm;  // amplitude 1e-2
  const int samples = 20;
  for (int i = 1; i <= samples; ++i) {
    const double t = t_end * i / samples;
    solver.advance(nu, t - nu.time, 1e-4);
    if (t < 0.5 * t_end) continue;
    auto lin = linear_solution(rho0, spec, t);
    lin.at(0) = 0.0;
    auto rho = fourier_of_field(nu, 128);
    rho.at(0) = 0.0;
    double err2 = 0.0;
    for (int j = 1; j <= 128; ++j) err2 += 2.0 * std::norm(rho[j] - lin[j]);
    ts.push_back(t);
    logs.push_back(0.5 * std::log(err2));
  }
  const double slope = (logs.back() - logs.front()) / (ts.back() - ts.front());
  CHECK(slope == doctest::Approx(2.0 * gm).epsilon(0.1));
}
