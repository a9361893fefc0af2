#include "covgrad/objective.hpp"

#include <cmath>
#include <string>

#include "covgrad/errors.hpp"

namespace covgrad {

Objective::Objective(std::size_t dimension, Evaluator evaluator)
    : dimension_(dimension), evaluator_(std::move(evaluator)) {
  if (!evaluator_) throw ArgumentError("objective needs an evaluator");
}

Objective Objective::from_tape(std::size_t dimension, Builder build) {
  return Objective(dimension, [build = std::move(build)](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    Tape tape(Mode::real);
    const NodeId p = tape.variable(w.cast<Scalar>());
    tape.set_output(build(tape, p));
    const double loss = tape.loss();
    if (grad != nullptr) *grad = tape.pullback().of(p).col(0).real();
    return loss;
  });
}

void Objective::check(const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) != dimension_) {
    throw ShapeError("objective expects " + std::to_string(dimension_) + " parameters, got " +
                     std::to_string(w.size()));
  }
}

double Objective::value(const Eigen::VectorXd& w) const {
  check(w);
  return evaluator_(w, nullptr);
}

double Objective::value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& gradient) const {
  check(w);
  const double v = evaluator_(w, &gradient);
  if (static_cast<std::size_t>(gradient.size()) != dimension_) {
    throw ShapeError("objective evaluator returned a gradient of the wrong size");
  }
  return v;
}

Eigen::VectorXd Objective::gradient(const Eigen::VectorXd& w) const {
  Eigen::VectorXd g;
  value_and_gradient(w, g);
  return g;
}

Eigen::MatrixXd finite_difference_hessian(const Objective& objective, const Eigen::VectorXd& w) {
  const Eigen::Index k = w.size();
  Eigen::MatrixXd h(k, k);
  Eigen::VectorXd probe = w;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double step = 1e-4 * (1.0 + std::abs(w[j]));
    probe[j] = w[j] + step;
    const Eigen::VectorXd up = objective.gradient(probe);
    probe[j] = w[j] - step;
    const Eigen::VectorXd down = objective.gradient(probe);
    probe[j] = w[j];
    h.col(j) = (up - down) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd flatten(const NetworkSpec& net) {
  if (net.mode != Mode::real) throw ContractError("flatten: only real-mode networks have a flat real layout");
  Eigen::VectorXd w(static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::Index at = 0;
  for (const Layer& l : net.layers) {
    w.segment(at, l.weight.size()) = l.weight.reshaped().real();
    at += l.weight.size();
    w.segment(at, l.bias.size()) = l.bias.real();
    at += l.bias.size();
  }
  return w;
}

Eigen::VectorXd flatten(const Gradient& gradient) {
  if (gradient.mode != Mode::real) throw ContractError("flatten: only real-mode gradients have a flat real layout");
  Eigen::Index k = 0;
  for (const LayerTensors& t : gradient.layers) k += t.weight.size() + t.bias.size();
  Eigen::VectorXd g(k);
  Eigen::Index at = 0;
  for (const LayerTensors& t : gradient.layers) {
    g.segment(at, t.weight.size()) = t.weight.reshaped().real();
    at += t.weight.size();
    g.segment(at, t.bias.size()) = t.bias.real();
    at += t.bias.size();
  }
  return g;
}

void assign(NetworkSpec& net, const Eigen::VectorXd& w) {
  if (net.mode != Mode::real) throw ContractError("assign: only real-mode networks have a flat real layout");
  if (static_cast<std::size_t>(w.size()) != net.parameter_count()) {
    throw ShapeError("assign: expected " + std::to_string(net.parameter_count()) + " parameters, got " +
                     std::to_string(w.size()));
  }
  Eigen::Index at = 0;
  for (Layer& l : net.layers) {
    l.weight.reshaped() = w.segment(at, l.weight.size()).cast<Scalar>();
    at += l.weight.size();
    l.bias = w.segment(at, l.bias.size()).cast<Scalar>();
    at += l.bias.size();
  }
}

}  // namespace covgrad
