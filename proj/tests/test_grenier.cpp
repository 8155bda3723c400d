#include <cmath>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"
#include "attnflow/grenier.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/pde.hpp"
#include "doctest.h"

using namespace attnflow;

namespace {

double l2_modes(const FourierModes& m) {
  double s = std::norm(m[0]);
  for (int k = 1; k <= m.k_cut(); ++k) s += 2.0 * std::norm(m[k]);
  return std::sqrt(s / kTwoPi);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("K = 1 is the seeded mode") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const PeriodicGrid g(256);
  const double alpha = 1e-3, t = 0.2;
  const auto f = grenier_approximant(alpha, 1, spec, k, t, g);
  const double amp = alpha * std::exp(spec.gamma_max() * t);
  for (int m = 0; m < 256; ++m) {
    CHECK(std::abs(f.values[m] - (1.0 / kTwoPi + amp * std::cos(spec.k_max() * g.node(m)))) <= 1e-14);
  }
}

TEST_CASE("higher terms start at zero") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const auto terms = grenier_terms(3, spec, k, 0.0);
  REQUIRE(terms.size() == 3);
  for (int j = 1; j < 3; ++j) {
    for (int m = 0; m <= terms[j].k_cut(); ++m) CHECK(std::abs(terms[j][m]) == 0.0);
  }
}

TEST_CASE("g_2 matches its closed form") {
  // S_2 = k^2 pi a_k e^{2 gamma s} cos(2 k theta), so
  // (g_2)_{2k} = 2 pi^2 gamma (e^{2 gamma t} - e^{gamma_{2k} t}) / (2 gamma - gamma_{2k}).
  for (double beta : {2.0, 5.0, 7.0}) {
    const auto k = InteractionKernel::transformer(beta);
    const auto spec = spectrum_for(k, 2);
    const int km = spec.k_max();
    const double g = spec.gamma_max(), g2 = spec.gamma(2 * km);
    for (double t : {0.1, 0.5}) {
      const auto terms = grenier_terms(2, spec, k, t);
      const double ref = 2 * kPi * kPi * g * (std::exp(2 * g * t) - std::exp(g2 * t)) / (2 * g - g2);
      CHECK(std::abs(terms[1][2 * km] - ref) <= 1e-9 * std::abs(ref));
      for (int m = 0; m <= terms[1].k_cut(); ++m) {
        if (m != 2 * km) CHECK(std::abs(terms[1][m]) <= 1e-12 * std::abs(ref));
      }
    }
  }
}

TEST_CASE("growth of g_j is e^{j gamma_max t}") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const double g = spec.gamma_max();
  for (int j = 1; j <= 3; ++j) {
    std::vector<double> ts, logs;
    for (int i = 0; i <= 10; ++i) {
      const double t = (3.0 + 0.3 * i) / g;
      const auto terms = grenier_terms(j, spec, k, t);
      ts.push_back(t);
      logs.push_back(std::log(l2_modes(terms[j - 1])));
    }
    CHECK(slope(ts, logs) == doctest::Approx(j * g).epsilon(0.03));
  }
}

TEST_CASE("regime and order checks") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const PeriodicGrid g(128);
  CHECK_THROWS_AS(grenier_approximant(0.5, 2, spec, k, 1.0, g), AssumptionViolation);
  CHECK_THROWS_AS(grenier_approximant(1e-3, 4, spec, k, 0.1, g), Error);
  CHECK_THROWS_AS(grenier_approximant(1e-3, 0, spec, k, 0.1, g), Error);
}

TEST_CASE("approximants improve with K against the resolved solution") {
  const auto k = InteractionKernel::transformer(5.0);
  const auto spec = spectrum_for(k, 2);
  const PeriodicGrid g(256);
  const double t = 1.0 / spec.gamma_max();
  std::vector<double> errs[3];
  std::vector<double> logs_alpha;
  for (double alpha : {4e-3, 2e-3, 1e-3}) {
    auto nu = cosine_density(g, alpha, spec.k_max());
    SpectralSolver solver(g, k);
    solver.advance(nu, t, 2e-4);
    logs_alpha.push_back(std::log(alpha));
    for (int K = 1; K <= 3; ++K) {
      const auto f = grenier_approximant(alpha, K, spec, k, t, g);
      double e = 0.0;
      for (int m = 0; m < 256; ++m) e += std::pow(f.values[m] - nu.values[m], 2);
      errs[K - 1].push_back(std::sqrt(e * g.dx()));
    }
  }
  for (std::size_t i = 0; i < logs_alpha.size(); ++i) {
    CHECK(errs[1][i] < errs[0][i]);
    CHECK(errs[2][i] < errs[1][i]);
  }
  for (int K = 1; K <= 2; ++K) {
    std::vector<double> le;
    for (double e : errs[K - 1]) le.push_back(std::log(e));
    CHECK(slope(logs_alpha, le) == doctest::Approx(K + 1.0).epsilon(0.15));
  }
}
