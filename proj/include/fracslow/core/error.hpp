#pragma once

#include <stdexcept>
#include <string>

namespace fracslow {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range (Hurst index, radii, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when an integrated state leaves the blow-up guard.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The step size does not resolve the 1/eps stiffness of a fast equation.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double required_dt)
      : Error(what), required_dt_(required_dt) {}
  double required_dt() const noexcept { return required_dt_; }

 private:
  double required_dt_;
};

/// The truncated Wiener past is too short for the requested tolerance.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double tail_estimate)
      : Error(what), tail_estimate_(tail_estimate) {}
  double tail_estimate() const noexcept { return tail_estimate_; }

 private:
  double tail_estimate_;
};

/// A drift failed the contractivity certificate an experiment requires.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// A coupled pair left the decay envelope it is constructed to obey; usually
/// the step is too coarse near coalescence.
class CouplingError : public Error {
 public:
  CouplingError(const std::string& what, double excess) : Error(what), excess_(excess) {}
  double excess() const noexcept { return excess_; }

 private:
  double excess_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ParameterError(msg);
}

}  // namespace detail
}  // namespace fracslow
