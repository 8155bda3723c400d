#include <cmath>
#include <random>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"
#include "doctest.h"

using namespace attnflow;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  std::vector<double> v(d);
  for (double& x : v) x = g(rng);
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

TEST_CASE("project_tangent examples") {
  const UnitVector x({1.0, 0.0});
  auto p = project_tangent(x, std::vector<double>{1.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(0.0));
  p = project_tangent(x, std::vector<double>{0.0, 1.0});
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  p = project_tangent(x, std::vector<double>{r, r});
  CHECK(std::abs(p[0]) < 1e-15);
  CHECK(std::abs(p[1] - r) < 1e-15);
}

TEST_CASE("project_tangent rejects mismatched dimensions") {
  const UnitVector x({1.0, 0.0, 0.0});
  CHECK_THROWS_AS(project_tangent(x, std::vector<double>{1.0, 0.0}), DimensionMismatch);
}

TEST_CASE("project_tangent is orthogonal and idempotent") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 6;
    const UnitVector x(random_unit(rng, d));
    std::vector<double> y(d);
    for (double& v : y) v = g(rng);
    const auto p = project_tangent(x, y);
    CHECK(std::abs(dot(x.coords(), p)) <= 1e-12);
    const auto pp = project_tangent(x, p);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(pp[i] - p[i]) <= 1e-12);
  }
}

TEST_CASE("renormalize") {
  auto u = renormalize(std::vector<double>{2.0, 0.0});
  CHECK(u.coords()[0] == 1.0);
  CHECK(u.coords()[1] == 0.0);
  u = renormalize(std::vector<double>{0.0, -3.0});
  CHECK(u.coords()[1] == -1.0);
  u = renormalize(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK(std::abs(norm(u.coords()) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(renormalize(std::vector<double>{0.0, 0.0}), Error);
}

TEST_CASE("UnitVector validates its invariants") {
  CHECK_THROWS_AS(UnitVector({1.0}), Error);
  CHECK_THROWS_AS(UnitVector({1.0, 1.0}), Error);
  CHECK_NOTHROW(UnitVector({0.6, 0.8}));
}

TEST_CASE("circle_distance examples") {
  CHECK(circle_distance(0.0, kPi) == doctest::Approx(kPi));
  CHECK(circle_distance(0.1, 0.1) == 0.0);
  CHECK(circle_distance(0.1, kTwoPi - 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(circle_distance(-0.1, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("circle_distance is a metric on sampled triples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(circle_distance(a, a) <= 1e-12);
    CHECK(circle_distance(a, b) == doctest::Approx(circle_distance(b, a)));
    CHECK(circle_distance(a, c) <= circle_distance(a, b) + circle_distance(b, c) + 1e-12);
    CHECK(circle_distance(a, b) >= 0.0);
    CHECK(circle_distance(a, b) <= kPi);
  }
}

TEST_CASE("angles and points round trip") {
  AngleConfiguration cfg({0.0, kPi / 2});
  auto pts = angles_to_points(cfg);
  CHECK(pts[0].coords()[0] == 1.0);
  CHECK(std::abs(pts[1].coords()[0]) < 1e-15);
  CHECK(pts[1].coords()[1] == 1.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> angles(100);
  for (double& a : angles) a = u(rng);
  const AngleConfiguration original(angles);
  const auto back = points_to_angles(angles_to_points(original));
  for (std::size_t i = 0; i < angles.size(); ++i) {
    CHECK(circle_distance(back.angles()[i], original.angles()[i]) <= 1e-12);
  }
}

TEST_CASE("AngleConfiguration wraps into [0, 2pi)") {
  AngleConfiguration cfg({-0.5, 7.0, kTwoPi});
  for (double a : cfg.angles()) {
    CHECK(a >= 0.0);
    CHECK(a < kTwoPi);
  }
  CHECK(cfg.angles()[0] == doctest::Approx(kTwoPi - 0.5));
  CHECK(cfg.angles()[2] == 0.0);
}
