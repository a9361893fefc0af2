#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace covgrad {

/// Every parameter and activation is stored as a complex double; real-mode
/// networks keep the imaginary parts at exactly zero.
using Scalar = std::complex<double>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Mode { real, complex };

enum class Activation { identity, sigmoid, relu, tanh };

std::string_view to_string(Mode mode);
std::string_view to_string(Activation activation);

/// Real-only activations cannot be applied to complex numbers (no ordering
/// for relu, no bounded extension of the logistic function).
constexpr bool allowed_in_complex_mode(Activation a) {
  return a == Activation::identity || a == Activation::tanh;
}

inline bool all_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Scalar v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

inline bool is_real(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.data()[i].imag() != 0.0) return false;
  }
  return true;
}

}  // namespace covgrad
