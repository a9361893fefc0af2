#include "covgrad/optimizers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "covgrad/errors.hpp"

namespace covgrad {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::aristotle: return "aristotle";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::damped: return "damped";
    case OptimizerKind::cogradient: return "cogradient";
  }
  return "unknown";
}

void Hyperparameters::validate(OptimizerKind kind) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  if (kind == OptimizerKind::momentum || kind == OptimizerKind::damped) {
    require(mass > 0.0 && std::isfinite(mass), "mass must be positive");
    require(friction >= 0.0 && std::isfinite(friction), "friction must be non-negative");
  }
  if (kind == OptimizerKind::damped) {
    require(beta > 0.0, "beta must be positive");
    require(beta * dt < 1.0, "beta * dt must stay below 1 or the rolling average overshoots");
    require(epsilon > 0.0, "epsilon must be positive");
  }
}

OptimizerState OptimizerState::for_network(const NetworkSpec& net, const Hyperparameters& hyper) {
  OptimizerState s;
  s.hyper = hyper;
  s.velocity = Displacement::zeros_like(net);
  s.rolling_force = Displacement::zeros_like(net);
  s.rolling_square = Displacement::zeros_like(net);
  return s;
}

namespace {

void check_gradient(const Gradient& grad, const NetworkSpec& net, const OptimizerState& state) {
  if (!grad.congruent_with(net)) throw ShapeError("gradient shape does not match the network");
  if (!grad.finite()) throw DivergenceError(state.step, "non-finite gradient");
}

void check_parameters(const NetworkSpec& net, std::size_t step) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    auto bad = [](const auto& x) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double a = std::abs(x.data()[k]);
        if (!std::isfinite(a) || a > kDivergenceThreshold) return true;
      }
      return false;
    };
    if (bad(l.weight) || bad(l.bias)) {
      throw DivergenceError(step, "layer " + std::to_string(i) + " parameters left the finite range");
    }
  }
}

void require_congruent(const OptimizerState& state, const NetworkSpec& net) {
  if (!state.velocity.congruent_with(net) || !state.rolling_force.congruent_with(net) ||
      !state.rolling_square.congruent_with(net)) {
    throw ShapeError("optimizer state does not match the network");
  }
}

}  // namespace

void step_aristotle(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state) {
  state.hyper.validate(OptimizerKind::aristotle);
  check_gradient(grad, net, state);
  const Displacement up = raise_index(metric, grad);
  const double learning_step = state.hyper.eta * state.hyper.dt;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (metric[i].is_frozen()) continue;
    net.layers[i].weight -= up.layers[i].weight * learning_step;
    net.layers[i].bias -= up.layers[i].bias * learning_step;
  }
  ++state.step;
  check_parameters(net, state.step);
}

void step_momentum(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state) {
  const Hyperparameters& h = state.hyper;
  h.validate(OptimizerKind::momentum);
  check_gradient(grad, net, state);
  require_congruent(state, net);
  const Displacement up = raise_index(metric, grad);
  const double kick = h.dt / h.mass;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (metric[i].is_frozen()) continue;
    LayerTensors& v = state.velocity.layers[i];
    // F = -up
    v.weight += kick * (-up.layers[i].weight - h.friction * v.weight);
    v.bias += kick * (-up.layers[i].bias - h.friction * v.bias);
    net.layers[i].weight += v.weight * h.dt;
    net.layers[i].bias += v.bias * h.dt;
  }
  ++state.step;
  check_parameters(net, state.step);
}

void step_damped(NetworkSpec& net, const LayerMetric& metric, const Gradient& grad, OptimizerState& state) {
  const Hyperparameters& h = state.hyper;
  h.validate(OptimizerKind::damped);
  check_gradient(grad, net, state);
  require_congruent(state, net);
  const Displacement up = raise_index(metric, grad);
  const double decay = h.beta * h.dt;
  const double kick = h.dt / h.mass;

  auto update = [&](auto& w, const auto& force_up, auto& fbar, auto& sq, auto& v) {
    const auto force = (-force_up).eval();
    fbar += decay * (force - fbar);
    sq += decay * (force.cwiseAbs2().template cast<Scalar>() - sq);
    const auto gamma =
        sq.unaryExpr([eps = h.epsilon](Scalar s) { return Scalar{1.0 / (std::sqrt(s.real()) + eps), 0.0}; }).eval();
    v += kick * (gamma.cwiseProduct(fbar) - h.friction * v);
    w += v * h.dt;
  };

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (metric[i].is_frozen()) continue;
    Layer& l = net.layers[i];
    update(l.weight, up.layers[i].weight, state.rolling_force.layers[i].weight,
           state.rolling_square.layers[i].weight, state.velocity.layers[i].weight);
    update(l.bias, up.layers[i].bias, state.rolling_force.layers[i].bias, state.rolling_square.layers[i].bias,
           state.velocity.layers[i].bias);
  }
  ++state.step;
  check_parameters(net, state.step);
}

CogradientStep step_cogradient(Eigen::VectorXd& w, const Objective& objective, double eta_dt) {
  if (!(eta_dt > 0.0)) throw ConfigError("cogradient learning step must be positive");
  const auto k = static_cast<std::size_t>(w.size());
  if (k > kMaxDenseParameters) {
    throw ArgumentError("cogradient needs a dense Hessian; " + std::to_string(k) + " parameters exceed " +
                        std::to_string(kMaxDenseParameters));
  }
  CogradientStep out;
  out.delta = Eigen::VectorXd::Zero(w.size());
  if (k == 0) return out;

  const Eigen::VectorXd grad = objective.gradient(w);
  if (!grad.allFinite()) throw NumericalError("cogradient: non-finite gradient");
  const Eigen::MatrixXd h = finite_difference_hessian(objective, w);
  if (!h.allFinite()) throw NumericalError("cogradient: non-finite Hessian");

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
  const double hadamard = h.rowwise().norm().prod();
  if (!(hadamard > 0.0) || std::abs(lu.determinant()) < 1e-12 * hadamard) {
    throw SingularHessianError("cogradient: Hessian is numerically singular");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  out.indefinite = out.min_eigenvalue < 0.0;

  out.delta = lu.solve(-grad) * eta_dt;
  w += out.delta;
  return out;
}

CogradientStep step_cogradient(NetworkSpec& net, const LayerMetric& metric, const Objective& objective,
                               OptimizerState& state) {
  state.hyper.validate(OptimizerKind::cogradient);
  if (metric.size() != net.layers.size()) throw ShapeError("cogradient: metric and network layer counts differ");
  const Eigen::VectorXd full = flatten(net);
  if (static_cast<std::size_t>(full.size()) != objective.dimension()) {
    throw ShapeError("cogradient: objective dimension does not match the network");
  }

  std::vector<Eigen::Index> free;
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(net.layers[i].parameter_count());
    if (!metric[i].is_frozen()) {
      for (Eigen::Index j = 0; j < n; ++j) free.push_back(at + j);
    }
    at += n;
  }

  const Objective restricted(free.size(), [&](const Eigen::VectorXd& sub, Eigen::VectorXd* grad) {
    Eigen::VectorXd x = full;
    for (std::size_t j = 0; j < free.size(); ++j) x[free[j]] = sub[static_cast<Eigen::Index>(j)];
    if (grad == nullptr) return objective.value(x);
    Eigen::VectorXd g;
    const double v = objective.value_and_gradient(x, g);
    grad->resize(static_cast<Eigen::Index>(free.size()));
    for (std::size_t j = 0; j < free.size(); ++j) (*grad)[static_cast<Eigen::Index>(j)] = g[free[j]];
    return v;
  });

  Eigen::VectorXd sub(static_cast<Eigen::Index>(free.size()));
  for (std::size_t j = 0; j < free.size(); ++j) sub[static_cast<Eigen::Index>(j)] = full[free[j]];
  const CogradientStep step = step_cogradient(sub, restricted, state.hyper.eta * state.hyper.dt);

  Eigen::VectorXd next = full;
  for (std::size_t j = 0; j < free.size(); ++j) next[free[j]] = sub[static_cast<Eigen::Index>(j)];
  // Only free coordinates are written so frozen layers keep their exact bits.
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    const auto nw = l.weight.size();
    const auto nb = l.bias.size();
    if (!metric[i].is_frozen()) {
      l.weight.reshaped() = next.segment(pos, nw).cast<Scalar>();
      l.bias = next.segment(pos + nw, nb).cast<Scalar>();
    }
    pos += nw + nb;
  }
  ++state.step;
  check_parameters(net, state.step);
  return step;
}

}  // namespace covgrad
