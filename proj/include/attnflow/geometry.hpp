#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace attnflow {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kUnitTolerance = 1e-12;

// A point on S^{d-1} embedded in R^d, d >= 2.
class UnitVector {
 public:
  // Throws unless |coords| = 1 within kUnitTolerance and d >= 2.
  explicit UnitVector(std::vector<double> coords);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

// N angles on the circle, each kept in [0, 2pi).
class AngleConfiguration {
 public:
  AngleConfiguration() = default;
  // Reduces every entry mod 2pi.
  explicit AngleConfiguration(std::vector<double> angles);

  std::size_t size() const { return angles_.size(); }
  double operator[](std::size_t i) const { return angles_[i]; }
  std::span<const double> angles() const { return angles_; }

  void set(std::size_t i, double angle);

 private:
  std::vector<double> angles_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

// P_x y = y - <x, y> x.
std::vector<double> project_tangent(const UnitVector& x, std::span<const double> y);

UnitVector renormalize(std::span<const double> v);

// Reduces an angle to [0, 2pi).
double wrap_angle(double theta);

// Geodesic distance on S^1, in [0, pi].
double circle_distance(double a, double b);

std::vector<UnitVector> angles_to_points(const AngleConfiguration& cfg);
AngleConfiguration points_to_angles(std::span<const UnitVector> points);

}  // namespace attnflow
