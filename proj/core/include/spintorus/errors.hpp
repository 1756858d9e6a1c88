#pragma once

#include <stdexcept>
#include <string>

namespace spintorus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation at a singular point of a potential (e.g. Coulomb at the origin).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Trajectory entered the capture radius around a singularity.
class CaptureError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size underflowed or the step budget was exhausted.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// (E, L) lies outside the bound-orbit window.
class NoBoundOrbitError : public Error {
 public:
  using Error::Error;
};

/// Angular momentum too small to prevent collapse onto the centre.
class FallToCenterError : public NoBoundOrbitError {
 public:
  using NoBoundOrbitError::NoBoundOrbitError;
};

/// Circular orbits: the radial cycle collapses to a point.
class DegenerateOrbitError : public Error {
 public:
  using Error::Error;
};

/// Quantized actions do not correspond to any bound torus.
class NoBoundStateError : public Error {
 public:
  using Error::Error;
};

/// Root finder failed; carries the last bracket for diagnostics.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double lower, double upper)
      : Error(what), lower_(lower), upper_(upper) {}
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

}  // namespace spintorus
