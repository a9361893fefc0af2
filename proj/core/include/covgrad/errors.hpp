#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covgrad {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimensions do not compose (layer sizes, batch widths, gradient layouts).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on the call was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside its admissible range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A mathematical domain violation, e.g. log of a zero probability.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyper-parameters or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or overflowing intermediate values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularHessianError : public Error {
 public:
  using Error::Error;
};

/// The Hessian at the located extremum is not positive definite, so a
/// Gaussian (Laplace) approximation around it is meaningless.
class SaddleError : public Error {
 public:
  SaddleError(const std::string& what, double min_eigenvalue, double max_eigenvalue);

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  double max_eigenvalue() const noexcept { return max_eigenvalue_; }

 private:
  double min_eigenvalue_;
  double max_eigenvalue_;
};

/// Parameters, gradient or loss left the finite range during descent.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what);

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm);

  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  double gradient_norm_;
};

}  // namespace covgrad
