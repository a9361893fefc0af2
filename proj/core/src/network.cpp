#include "covgrad/network.hpp"

#include <cmath>
#include <string>

#include "covgrad/errors.hpp"

namespace covgrad {

void NetworkSpec::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const std::string name = "layer " + std::to_string(i);
    if (l.weight.size() == 0) throw ShapeError(name + ": empty weight matrix");
    if (l.has_bias() && l.bias.size() != l.weight.rows()) {
      throw ShapeError(name + ": bias has " + std::to_string(l.bias.size()) + " entries for " +
                       std::to_string(l.weight.rows()) + " outputs");
    }
    if (i > 0 && layers[i - 1].weight.rows() != l.weight.cols()) {
      throw ShapeError(name + ": expects " + std::to_string(l.weight.cols()) + " inputs but layer " +
                       std::to_string(i - 1) + " produces " + std::to_string(layers[i - 1].weight.rows()));
    }
    if (mode == Mode::complex && !allowed_in_complex_mode(l.activation)) {
      throw ContractError(name + ": " + std::string(to_string(l.activation)) +
                          " is not defined on complex numbers");
    }
    if (mode == Mode::real && (!is_real(l.weight) || !is_real(l.bias))) {
      throw ContractError(name + ": real-mode network holds complex parameters");
    }
  }
}

std::size_t NetworkSpec::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t NetworkSpec::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t k = 0;
  for (const Layer& l : layers) k += l.parameter_count();
  return k;
}

ForwardPass forward(const NetworkSpec& net, const Matrix& inputs) {
  net.validate();
  ForwardPass pass{Tape(net.mode), 0, {}};
  if (!net.layers.empty() && inputs.rows() != net.layers.front().weight.cols()) {
    throw ShapeError("layer 0: expects input dimension " + std::to_string(net.layers.front().weight.cols()) +
                     ", got " + std::to_string(inputs.rows()));
  }
  NodeId z = pass.tape.constant(inputs);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    const NodeId w = pass.tape.variable(l.weight, ParamTag{i, false});
    pass.parameters.push_back(w);
    NodeId y = pass.tape.matmul(w, z);
    if (l.has_bias()) {
      const NodeId b = pass.tape.variable(l.bias, ParamTag{i, true});
      pass.parameters.push_back(b);
      y = pass.tape.add_bias(y, b);
    }
    z = l.activation == Activation::identity ? y : pass.tape.activate(y, l.activation);
  }
  pass.output = z;
  return pass;
}

Gradient pullback(const Tape& tape) {
  const TapeGradient tg = tape.pullback();
  Gradient out;
  out.mode = tape.mode();
  for (NodeId v : tg.variables()) {
    const auto tag = tape.tag(v);
    if (!tag) continue;
    if (out.layers.size() <= tag->layer) out.layers.resize(tag->layer + 1);
    if (tag->bias) {
      out.layers[tag->layer].bias = tg.of(v).col(0);
    } else {
      out.layers[tag->layer].weight = tg.of(v);
    }
  }
  return out;
}

namespace {

double central(const NetworkLoss& loss, NetworkSpec& probe, Scalar& slot, Scalar direction, double h) {
  const Scalar saved = slot;
  slot = saved + direction * h;
  const double up = loss(probe);
  slot = saved - direction * h;
  const double down = loss(probe);
  slot = saved;
  return (up - down) / (2.0 * h);
}

Scalar fd_entry(const NetworkLoss& loss, NetworkSpec& probe, Scalar& slot, double h) {
  const double dx = central(loss, probe, slot, {1.0, 0.0}, h);
  if (probe.mode == Mode::real) return {dx, 0.0};
  const double dy = central(loss, probe, slot, {0.0, 1.0}, h);
  return Scalar{dx, dy} * 0.5;
}

}  // namespace

Gradient finite_difference_gradient(const NetworkSpec& net, const NetworkLoss& loss, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite difference step must be positive");
  NetworkSpec probe = net;
  Gradient g = Gradient::zeros_like(net);
  for (std::size_t i = 0; i < probe.layers.size(); ++i) {
    Layer& l = probe.layers[i];
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) {
      g.layers[i].weight.data()[k] = fd_entry(loss, probe, l.weight.data()[k], h);
    }
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) {
      g.layers[i].bias.data()[k] = fd_entry(loss, probe, l.bias.data()[k], h);
    }
  }
  return g;
}

Displacement difference(const NetworkSpec& to, const NetworkSpec& from) {
  if (to.layers.size() != from.layers.size()) throw ShapeError("difference: layer counts differ");
  Displacement d;
  d.mode = to.mode;
  for (std::size_t i = 0; i < to.layers.size(); ++i) {
    const Layer& a = to.layers[i];
    const Layer& b = from.layers[i];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || a.bias.size() != b.bias.size()) {
      throw ShapeError("difference: layer " + std::to_string(i) + " shapes differ");
    }
    d.layers.push_back({a.weight - b.weight, a.bias - b.bias});
  }
  return d;
}

double parameter_norm(const NetworkSpec& net) {
  double s = 0.0;
  for (const Layer& l : net.layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return std::sqrt(s);
}

}  // namespace covgrad
