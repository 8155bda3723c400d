#include <algorithm>
#include <cmath>
#include <random>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/measures.hpp"
#include "attnflow/pde.hpp"
#include "doctest.h"

using namespace attnflow;

namespace {

std::vector<double> uniform_sample(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Brute force over the N order-preserving cyclic matchings.
double cyclic_matching_w1(std::vector<double> a, std::vector<double> b) {
  for (double& x : a) x = wrap_angle(x);
  for (double& x : b) x = wrap_angle(x);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size();
  double best = 1e300;
  for (std::size_t s = 0; s < n; ++s) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += circle_distance(a[i], b[(i + s) % n]);
    best = std::min(best, c / n);
  }
  return best;
}

std::vector<double> equally_spaced(std::size_t n, double offset = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = offset + kTwoPi * i / n;
  return v;
}

}  // namespace

TEST_CASE("EmpiricalMeasure sorts and wraps") {
  EmpiricalMeasure mu({3.0, -1.0, 7.0});
  const auto a = mu.atoms();
  CHECK(std::is_sorted(a.begin(), a.end()));
  for (double x : a) {
    CHECK(x >= 0.0);
    CHECK(x < kTwoPi);
  }
  CHECK_THROWS_AS(EmpiricalMeasure({}), Error);
}

TEST_CASE("empirical Fourier coefficients") {
  const auto eq = empirical_fourier(EmpiricalMeasure(equally_spaced(12)), 30);
  CHECK(eq[0] == 0.0);
  for (int k = 1; k < 12; ++k) CHECK(std::abs(eq[k]) <= 1e-14);
  CHECK(std::abs(eq[12] - 1.0) <= 1e-13);
  const auto dirac = empirical_fourier(EmpiricalMeasure({0.0}), 20);
  for (int k = 1; k <= 20; ++k) CHECK(std::abs(dirac[k] - 1.0) <= 1e-14);

  // Monte-Carlo calibration: |rho_3| for N = 1e4 iid uniform atoms.
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto m = empirical_fourier(EmpiricalMeasure(uniform_sample(rng, 10000)), 3);
    const double a = std::abs(m[3]);
    if (a >= 1e-3 && a <= 1e-1) ++inside;
  }
  CHECK(inside >= 95);
  CHECK(default_fourier_cutoff(100) == 50);
  CHECK(default_fourier_cutoff(100000) == 512);
}

TEST_CASE("negative Sobolev norms") {
  const FourierModes zero(std::vector<std::complex<double>>(10));
  CHECK(sobolev_neg_norm(zero, 1).value == 0.0);
  const double a = 0.3;
  for (int k : {1, 3, 7}) {
    std::vector<std::complex<double>> v(10);
    v[k] = kPi * a;  // a cos(k theta)
    for (int s : {1, 2}) {
      const double ref = std::sqrt(2.0) * kPi * a * std::pow(1.0 + k * k, -0.5 * s);
      CHECK(sobolev_neg_norm(FourierModes(v), s).value == doctest::Approx(ref).epsilon(1e-14));
    }
  }
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const EmpiricalMeasure mu(uniform_sample(rng, 300));
    const auto m = empirical_fourier(mu, 150);
    CHECK(sobolev_neg_norm(m, 2).value <= sobolev_neg_norm(m, 1).value);
    // the truncated value and its tail bound bracket the refined value
    const auto n40 = sobolev_neg_norm(empirical_fourier(mu, 40), 1);
    const auto n150 = sobolev_neg_norm(m, 1);
    CHECK(n150.value >= n40.value);
    CHECK(n150.value <= n40.value + n40.tail_bound);
    CHECK(n150.tail_bound < n40.tail_bound);
  }
  CHECK_THROWS_AS(sobolev_neg_norm(zero, 0), Error);
}

TEST_CASE("empirical and grid evaluations of the H^-1 norm agree") {
  std::mt19937_64 rng(8);
  const EmpiricalMeasure mu(uniform_sample(rng, 1000));
  const auto emp = sobolev_neg_norm(empirical_fourier(mu, 256), 1).value;
  const PeriodicGrid g(1 << 16);
  auto field = fourier_of_field(density_of(mu, g), 256);
  field.at(0) = 0.0;
  const auto grid = sobolev_neg_norm(field, 1).value;
  CHECK(grid == doctest::Approx(emp).epsilon(0.01));
}

TEST_CASE("circular W1 examples") {
  const EmpiricalMeasure a({0.1, 1.0, 4.0});
  CHECK(wasserstein1_circle(a, a) == 0.0);
  CHECK(wasserstein1_circle(EmpiricalMeasure({0.0}), EmpiricalMeasure({kPi})) == doctest::Approx(kPi));
  CHECK(wasserstein1_circle(EmpiricalMeasure({0.1}), EmpiricalMeasure({kTwoPi - 0.1})) ==
        doctest::Approx(0.2));
  CHECK_THROWS_AS(wasserstein1_circle(std::vector<Atom>{{0.0, 1.0}}, std::vector<Atom>{{1.0, 0.5}}),
                  Error);
}

TEST_CASE("circular W1 equals the cyclic-matching minimum") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto x = uniform_sample(rng, n), y = uniform_sample(rng, n);
    const double w = wasserstein1_circle(EmpiricalMeasure(x), EmpiricalMeasure(y));
    CHECK(std::abs(w - cyclic_matching_w1(x, y)) <= 1e-10);
  }
}

TEST_CASE("W1 metric properties and rotation invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + trial % 20;
    const EmpiricalMeasure a(uniform_sample(rng, n)), b(uniform_sample(rng, n)), c(uniform_sample(rng, n));
    const double ab = wasserstein1_circle(a, b), bc = wasserstein1_circle(b, c),
                 ac = wasserstein1_circle(a, c);
    CHECK(std::abs(ab - wasserstein1_circle(b, a)) <= 1e-10);
    CHECK(ac <= ab + bc + 1e-10);
    const double r = u(rng);
    auto rotate = [r](const EmpiricalMeasure& m) {
      std::vector<double> v(m.atoms().begin(), m.atoms().end());
      for (double& x : v) x += r;
      return EmpiricalMeasure(v);
    };
    CHECK(std::abs(wasserstein1_circle(rotate(a), rotate(b)) - ab) <= 1e-10);
  }
}

TEST_CASE("W1 to the uniform measure") {
  for (std::size_t n : {1u, 4u, 50u}) {
    const EmpiricalMeasure eq(equally_spaced(n, kPi / n));
    CHECK(wasserstein1_to_uniform(eq) == doctest::Approx(kPi / (2.0 * n)).epsilon(1e-10));
  }
  // agrees with the grid computation on a fine grid
  std::mt19937_64 rng(12);
  const EmpiricalMeasure mu(uniform_sample(rng, 200));
  const PeriodicGrid g(1 << 18);
  const double grid = wasserstein1_circle(mu, uniform_density(g));
  CHECK(grid == doctest::Approx(wasserstein1_to_uniform(mu)).epsilon(1e-3));
}

TEST_CASE("W1 between grid densities") {
  const PeriodicGrid g(4096);
  const auto a = uniform_density(g);
  CHECK(wasserstein1_circle(a, a) == 0.0);
  // shifting a smooth density by s moves every unit of mass by s
  const auto b = cosine_density(g, 0.1, 1, 0.0), c = cosine_density(g, 0.1, 1, 0.2);
  // W1 = int |F_b - F_c - m| with F difference 0.1 (sin(th) - sin(th - 0.2)); closed form
  const double amp = 0.1 * 2.0 * std::sin(0.1);
  CHECK(wasserstein1_circle(b, c) == doctest::Approx(4.0 * amp).epsilon(1e-3));
  CHECK_THROWS_AS(wasserstein1_circle(a, uniform_density(PeriodicGrid(1024))), DimensionMismatch);
}

TEST_CASE("W1 tends to zero with the H^-1 distance") {
  // mu_n: N atoms perturbed by shrinking displacements of a fixed pattern
  const auto base = equally_spaced(64);
  double prev_w = 1e9, prev_h = 1e9;
  for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    std::vector<double> moved(base);
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += eps * std::sin(3.0 * base[i]);
    const EmpiricalMeasure mu(moved), nu(base);
    const double w = wasserstein1_circle(mu, nu);
    auto fm = empirical_fourier(mu, 32), fn = empirical_fourier(nu, 32);
    const double h = sobolev_neg_norm(fm + (-1.0) * fn, 1).value;
    CHECK(w < prev_w);
    CHECK(h < prev_h);
    prev_w = w;
    prev_h = h;
  }
  CHECK(prev_w < 0.01);
}

TEST_CASE("TV histogram distance") {
  std::mt19937_64 rng(2);
  const EmpiricalMeasure a(uniform_sample(rng, 500));
  CHECK(tv_histogram(a, a) == 0.0);
  const EmpiricalMeasure spike(std::vector<double>(100, 0.01));
  const EmpiricalMeasure flat(equally_spaced(100, kTwoPi / 200));
  CHECK(tv_histogram(spike, flat) == doctest::Approx(0.99));
  CHECK(tv_histogram_uniform(spike) == doctest::Approx(0.99));
  // rotation by whole bins relabels both histograms identically
  const EmpiricalMeasure b(uniform_sample(rng, 500));
  auto shift = [](const EmpiricalMeasure& m, int bins) {
    std::vector<double> v(m.atoms().begin(), m.atoms().end());
    for (double& x : v) x += kTwoPi * bins / 100.0;
    return EmpiricalMeasure(v);
  };
  CHECK(tv_histogram(shift(a, 7), shift(b, 7)) == doctest::Approx(tv_histogram(a, b)).epsilon(1e-12));
  const auto h = histogram(a, 10);
  long total = 0;
  for (long c : h.counts) total += c;
  CHECK(total == 500);
  CHECK_THROWS_AS(histogram(a, 1), Error);
}

TEST_CASE("cluster counting") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> blob(0.0, 0.01 / 3);
  std::vector<double> three;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 200; ++i) three.push_back(kTwoPi * c / 3 + blob(rng));
  }
  auto count = count_clusters(EmpiricalMeasure(three));
  REQUIRE(count.has_value());
  CHECK(*count == 3);
  CHECK_FALSE(count_clusters(EmpiricalMeasure(equally_spaced(500))).has_value());
  // a tiny fourth group is ignored by the mass threshold
  for (int i = 0; i < 5; ++i) three.push_back(1.0 + blob(rng));
  CHECK(*count_clusters(EmpiricalMeasure(three)) == 3);
  CHECK(*count_clusters(EmpiricalMeasure(three), 10.0, 0.001) == 4);
  CHECK_THROWS_AS(count_clusters(EmpiricalMeasure({1.0})), Error);
}

TEST_CASE("W1 to the cluster configuration") {
  std::vector<double> exact;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 25; ++i) exact.push_back(0.37 + kTwoPi * c / 4);
  }
  CHECK(w1_to_cluster(EmpiricalMeasure(exact), 4) <= 1e-9);
  // uniform atoms vs k clusters: W1 = pi / (2k) in the continuum limit
  const EmpiricalMeasure flat(equally_spaced(4000, kPi / 4000));
  CHECK(w1_to_cluster(flat, 3) == doctest::Approx(kPi / 6).epsilon(1e-3));
}

TEST_CASE("exit time detection") {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
  const auto never = exit_time(t, std::vector<double>{0.01, 0.01, 0.01, 0.01}, 0.5);
  CHECK_FALSE(never.time.has_value());
  CHECK(never.final_distance == 0.01);
  const auto early = exit_time(t, std::vector<double>{0.9, 0.95, 1.0, 1.0}, 0.5);
  CHECK(*early.time == 0.0);
  const auto mid = exit_time(t, std::vector<double>{0.1, 0.3, 0.7, 0.9}, 0.5);
  CHECK(*mid.time == doctest::Approx(0.15));
  CHECK_THROWS_AS(exit_time(t, std::vector<double>{0.1}, 0.5), DimensionMismatch);
}

TEST_CASE("phase times") {
  const auto spec = spectrum_for(InteractionKernel::transformer(2.0), 2);
  const std::size_t n = 10000;
  const double scale = std::pow(double(n), -0.25);
  const auto p = phase_times(spec, n, scale, 0.3 * scale, 0.05);
  CHECK(std::abs(p.t1) <= 1e-14);
  CHECK(p.t1_nonpositive);
  CHECK(p.alpha == doctest::Approx(0.3 * scale));
  const auto q = phase_times(spec, n, scale, 0.3 * scale, 0.1);
  CHECK(q.t2 - p.t2 == doctest::Approx(std::log(2.0) / spec.gamma_max()).epsilon(1e-12));
  const auto r = phase_times(spec, n, 0.01 * scale, 0.003 * scale, 0.05);
  CHECK(r.t1 == doctest::Approx(std::log(100.0) / spec.gamma_max()));
  CHECK_FALSE(r.t1_nonpositive);
  CHECK_THROWS_AS(phase_times(spec, n, 0.0, 0.0, 0.05), Error);
}

TEST_CASE("measure summary") {
  std::mt19937_64 rng(10);
  const EmpiricalMeasure mu(uniform_sample(rng, 400));
  const auto s = summarize(mu);
  CHECK(s.fourier.k_cut() == 200);
  CHECK(s.h_minus_2 <= s.h_minus_1);
  CHECK(s.w1_to_uniform > 0.0);
  CHECK(s.dominant_mode >= 1);
  CHECK_FALSE(s.cluster_count.has_value());
}
