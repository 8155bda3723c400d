#pragma once

#include <stdexcept>
#include <string>

namespace attnflow {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// The growth-rate maximum is not attained at a single mode.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class CflViolation : public Error {
 public:
  CflViolation(const std::string& what, double max_speed, double required_dt)
      : Error(what), max_speed_(max_speed), required_dt_(required_dt) {}
  double max_speed() const { return max_speed_; }
  double required_dt() const { return required_dt_; }

 private:
  double max_speed_;
  double required_dt_;
};

// A NaN or Inf appeared in an evolving state.
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, double time, std::size_t index)
      : Error(what), time_(time), index_(index) {}
  double time() const { return time_; }
  std::size_t index() const { return index_; }

 private:
  double time_;
  std::size_t index_;
};

}  // namespace attnflow
