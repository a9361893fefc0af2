#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "covgrad/network.hpp"
#include "covgrad/tape.hpp"

namespace covgrad {

/// A real loss over a flat real parameter vector, differentiable by pullback.
class Objective {
 public:
  /// Returns the loss and, when `gradient` is non-null, writes dL/dw into it.
  using Evaluator = std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd* gradient)>;
  /// Records a scalar loss on `tape` from the k x 1 parameter leaf.
  using Builder = std::function<NodeId(Tape& tape, NodeId parameters)>;

  Objective(std::size_t dimension, Evaluator evaluator);

  /// Objective whose gradient comes from a real-mode tape recorded by `build`.
  static Objective from_tape(std::size_t dimension, Builder build);

  std::size_t dimension() const noexcept { return dimension_; }
  double value(const Eigen::VectorXd& w) const;
  double value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& gradient) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;

 private:
  void check(const Eigen::VectorXd& w) const;

  std::size_t dimension_;
  Evaluator evaluator_;
};

/// Hessian by central differences of the pulled-back gradient with step
/// 1e-4 (1 + |w_j|) per coordinate, symmetrized.
Eigen::MatrixXd finite_difference_hessian(const Objective& objective, const Eigen::VectorXd& w);

/// Real-mode parameters in layer order, weights column-major then bias.
Eigen::VectorXd flatten(const NetworkSpec& net);
Eigen::VectorXd flatten(const Gradient& gradient);
/// Writes a flat vector back into the parameters of `net`.
void assign(NetworkSpec& net, const Eigen::VectorXd& w);

}  // namespace covgrad
