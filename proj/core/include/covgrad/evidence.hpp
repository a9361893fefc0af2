#pragma once

#include <cstddef>
#include <ostream>

#include <Eigen/Dense>

#include "covgrad/objective.hpp"

namespace covgrad {

/// Symmetric k x k Hessian of the regularized loss:
/// h_ij = d2 L0 / dw_i dw_j + delta_ij / (N lambda^2).
struct HessianMatrix {
  Eigen::MatrixXd values;

  std::size_t k() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

/// Finite-difference Hessian of `loss0` at `w` plus the prior term.
/// Throws NumericalError naming the first non-finite entry.
HessianMatrix hessian(const Objective& loss0, const Eigen::VectorXd& w, std::size_t n, double lambda_sq);

/// L1(W) = L0(W) + |W|^2 / (2 N lambda^2).
Objective regularized_objective(const Objective& loss0, std::size_t n, double lambda_sq);

struct MinimizeOptions {
  std::size_t max_iterations = 200;
  double gradient_tolerance = 1e-10;
};

/// Minimizer W1 of L1 by co-gradient (Newton) steps, falling back to the
/// damped stepper while the Hessian is not positive definite.
/// Throws ConvergenceError when the iteration budget runs out.
Eigen::VectorXd minimize_l1(const Objective& loss0, std::size_t n, double lambda_sq, const Eigen::VectorXd& init,
                            const MinimizeOptions& options = {});

/// Laplace approximation of the regularized Bayesian integral,
/// exp(-N L2) with
///   L2 = L1(W1) + (k/2) log(N)/N + (log sqrt(h) - log sqrt(g)) / N,
/// where sqrt(g) = lambda^-k is the prior volume element.
struct LaplaceReport {
  std::size_t k = 0;
  std::size_t n = 0;
  double lambda_sq = 0.0;
  Eigen::VectorXd w1;
  double l0 = 0.0;          // L0(W1)
  double l1 = 0.0;          // L1(W1)
  double log_sqrt_h = 0.0;  // 1/2 log det of the regularized Hessian
  double log_sqrt_g = 0.0;  // -k log(lambda)
  /// 1/2 log det of the unregularized (Fisher) Hessian at W1, the
  /// lambda -> infinity limit of log_sqrt_h. NaN when not positive definite.
  double log_sqrt_fisher = 0.0;
  double l2 = 0.0;
  Eigen::VectorXd hessian_eigenvalues;

  void write(std::ostream& out) const;
  static void write_csv_header(std::ostream& out);
  void write_csv_row(std::ostream& out) const;
};

/// Throws SaddleError when any Hessian eigenvalue is <= 1e-10 trace / k.
LaplaceReport laplace_evidence(const Objective& loss0, std::size_t n, double lambda_sq, const Eigen::VectorXd& init,
                               const MinimizeOptions& options = {});

/// Renormalized comparison of two model families trained on the same data.
/// Differences are model 1 minus model 2, so a positive delta_l2 prefers
/// model 2.
struct ModelComparison {
  std::size_t n = 0;
  double delta_l0 = 0.0;
  long delta_k = 0;
  double delta_log_sqrt_h = 0.0;
  double delta_l2 = 0.0;
  double bic = 0.0;
  /// L2(model 1) - L2(model 2) with the log sqrt(g) terms kept; differs from
  /// delta_l2 by a term that grows like delta_k log(lambda) / N.
  double delta_l2_regularized = 0.0;
  double lambda_residual = 0.0;
  /// The Fisher log-determinant of either model was unavailable and the
  /// regularized Hessian was used instead.
  bool fisher_fallback = false;
  int preferred = 1;

  void write(std::ostream& out) const;
  static void write_csv_header(std::ostream& out);
  void write_csv_row(std::ostream& out) const;
};

/// delta_l2 = delta_l0 + (delta_k / 2) log(N)/N + delta log sqrt(h) / N and
/// BIC = 2 N delta_l0 + delta_k log N. Throws ContractError unless both
/// reports share N and lambda^2.
ModelComparison compare_models(const LaplaceReport& model1, const LaplaceReport& model2);

struct QuadratureOptions {
  /// Integration box is [-half_width * lambda, half_width * lambda]^k.
  double half_width = 8.0;
  /// Starting grid size per axis; 0 selects 401, 201 or 101 for k = 1, 2, 3.
  std::size_t min_points = 0;
  double tolerance = 1e-6;
  std::size_t max_evaluations = std::size_t{1} << 24;
};

struct QuadratureResult {
  double log_gamma = 0.0;
  std::size_t points_per_axis = 0;
  std::size_t evaluations = 0;
  /// |log estimate - log previous estimate| at the accepted resolution.
  double last_change = 0.0;
};

/// Brute-force log of  integral dW sqrt(g) (2 pi)^(-k/2) exp(-N L1(W))  for
/// k in {1, 2, 3}. Trapezoid tensor grids are refined by halving the spacing
/// until two successive estimates agree to `tolerance`; the exponent is
/// shifted by its grid minimum before exponentiation.
QuadratureResult quadrature_evidence(const Objective& loss0, std::size_t n, double lambda_sq,
                                     const QuadratureOptions& options = {});

}  // namespace covgrad
