#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace covgrad {

enum class OracleKind { quadratic, quartic };

/// Initial value and rate of a one-parameter gradient flow dW/dt = -eta dL/dW.
/// quadratic: L = W^2 / 2.  quartic: L = alpha W^4 / 8.
struct OracleSpec {
  OracleKind kind = OracleKind::quadratic;
  double w0 = 1.0;
  double eta = 1.0;
  double alpha = 1.0;

  void validate() const;
  double loss(double w) const;
  double dloss(double w) const;
};

struct OracleState {
  double w = 0.0;
  double loss = 0.0;
};

/// W(t) = W0 exp(-eta t), L(t) = L0 exp(-2 eta t).
OracleState quadratic_exact(const OracleSpec& spec, double t);

/// W(t) = W0 / sqrt(1 + alpha eta W0^2 t), L(t) = L0 / (1 + alpha eta W0^2 t)^2.
OracleState quartic_exact(const OracleSpec& spec, double t);

OracleState exact(const OracleSpec& spec, double t);

enum class CensusModel { independent_signs, random_symmetric };

std::string_view to_string(CensusModel model);

struct CensusResult {
  std::size_t trials = 0;
  std::size_t minima = 0;
  double fraction = 0.0;
  /// Binomial standard error sqrt(f (1 - f) / trials).
  double standard_error = 0.0;
};

/// Monte Carlo fraction of critical points that are minima in dimension D.
///
/// independent_signs draws D independent second-derivative signs, so the
/// expected fraction is 2^-D. random_symmetric symmetrizes standard normal
/// matrices, (A + A^T) / 2, and counts the positive definite ones. Trials are
/// processed in fixed chunks, each with its own seeded stream.
CensusResult saddle_census(std::size_t dimension, std::size_t trials, CensusModel model, std::uint64_t seed);

}  // namespace covgrad
