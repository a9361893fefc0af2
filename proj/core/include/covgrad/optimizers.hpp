#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

#include "covgrad/metric.hpp"
#include "covgrad/network.hpp"
#include "covgrad/objective.hpp"

namespace covgrad {

enum class OptimizerKind { aristotle, momentum, damped, cogradient };

std::string_view to_string(OptimizerKind kind);

struct Hyperparameters {
  double eta = 0.1;       // learning rate
  double dt = 1.0;        // time step; eta * dt is the learning step
  double mass = 1.0;
  double friction = 1.0;
  double beta = 0.1;      // decay rate of the rolling force averages
  double epsilon = 1e-8;  // floor of the per-coordinate damping denominator

  /// Throws ConfigError for values the chosen stepper cannot use.
  void validate(OptimizerKind kind) const;
};

/// Any parameter (or loss) above this magnitude counts as divergence.
inline constexpr double kDivergenceThreshold = 1e12;

struct OptimizerState {
  Hyperparameters hyper;
  Displacement velocity;
  Displacement rolling_force;
  /// Rolling average of |F_w|^2 per coordinate.
  Displacement rolling_square;
  std::size_t step = 0;

  static OptimizerState for_network(const NetworkSpec& net, const Hyperparameters& hyper);
};

/// Finite learning step of the metric flow: dW = -g^{-1} dL/dW eta dt.
void step_aristotle(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state);

/// Semi-implicit Euler on m dv/dt = F - friction v with F = -raise_index(grad):
/// v += dt/m (F - friction v), then W += v dt.
void step_momentum(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state);

/// Rolling-average damped descent:
///   Fbar += beta dt (F - Fbar),  S += beta dt (|F|^2 - S),
///   gamma = 1 / (sqrt(S) + epsilon),
///   v += dt/m (gamma * Fbar - friction v),  W += v dt.
/// No bias correction is applied to the rolling averages.
void step_damped(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state);

struct CogradientStep {
  Eigen::VectorXd delta;
  /// The Hessian has a negative eigenvalue: the step heads for a saddle or
  /// maximum as readily as for a minimum.
  bool indefinite = false;
  double min_eigenvalue = 0.0;
};

/// Largest parameter count for which a dense Hessian is formed.
inline constexpr std::size_t kMaxDenseParameters = 64;

/// Newton step with the Hessian as metric: solves h delta = -grad by LU and
/// applies eta_dt * delta to `w`. Throws SingularHessianError when
/// |det h| / prod_i ||h_i|| < 1e-12.
CogradientStep step_cogradient(Eigen::VectorXd& w, const Objective& objective, double eta_dt);

/// Network form: frozen layers are excluded from the Hessian and stay fixed.
/// `objective` must be over flatten(net).
CogradientStep step_cogradient(NetworkSpec& net, const LayerMetric& metric, const Objective& objective,
                               OptimizerState& state);

}  // namespace covgrad
