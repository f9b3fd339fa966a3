#pragma once

#include <stdexcept>
#include <string>

namespace lgsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (negative rates, kappa <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Gamma_2 < Gamma_1 / 2.
class UnphysicalRatesError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// A closed form is singular for the requested parameters.
class SingularParameterError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Non-uniform grid, mismatched grids, grid incompatible with a record layout.
class GridError : public Error {
 public:
  using Error::Error;
};

// Inverse transform produced an imaginary part: input was not an even spectrum.
class ConventionError : public Error {
 public:
  using Error::Error;
};

// Unusable data: all-NaN curves, mixed record lengths, empty tags.
class DataError : public Error {
 public:
  using Error::Error;
};

// Outside the validity range of an approximation.
class ValidityError : public Error {
 public:
  using Error::Error;
};

// Fock space too small for the requested photon number.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double step_hint)
      : Error(what), step_hint_(step_hint) {}
  // Suggested maximum step (s) for a retry.
  double step_hint() const { return step_hint_; }

 private:
  double step_hint_;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace lgsim
