#include "attnflow/geometry.hpp"

#include <cmath>
#include <sstream>

#include "attnflow/error.hpp"

namespace attnflow {

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw DimensionMismatch("UnitVector requires d >= 2");
  }
  const double n = norm(coords_);
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    std::ostringstream os;
    os << "UnitVector norm " << n << " deviates from 1 by more than " << kUnitTolerance;
    throw Error(os.str());
  }
}

AngleConfiguration::AngleConfiguration(std::vector<double> angles) : angles_(std::move(angles)) {
  for (double& a : angles_) a = wrap_angle(a);
}

void AngleConfiguration::set(std::size_t i, double angle) { angles_.at(i) = wrap_angle(angle); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

std::vector<double> project_tangent(const UnitVector& x, std::span<const double> y) {
  if (x.dim() != y.size()) {
    throw DimensionMismatch("project_tangent: x and y have different dimensions");
  }
  const double c = dot(x.coords(), y);
  std::vector<double> out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * x[i];
  return out;
}

UnitVector renormalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("renormalize: zero or non-finite vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& c : out) c /= n;
  return UnitVector(std::move(out));
}

double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double circle_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

std::vector<UnitVector> angles_to_points(const AngleConfiguration& cfg) {
  std::vector<UnitVector> out;
  out.reserve(cfg.size());
  for (double a : cfg.angles()) out.emplace_back(std::vector<double>{std::cos(a), std::sin(a)});
  return out;
}

AngleConfiguration points_to_angles(std::span<const UnitVector> points) {
  std::vector<double> angles;
  angles.reserve(points.size());
  for (const auto& p : points) {
    if (p.dim() != 2) throw DimensionMismatch("points_to_angles requires d = 2");
    angles.push_back(std::atan2(p[1], p[0]));
  }
  return AngleConfiguration(std::move(angles));
}

}  // namespace attnflow
