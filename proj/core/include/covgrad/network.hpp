#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "covgrad/scalar.hpp"
#include "covgrad/tape.hpp"

namespace covgrad {

/// One affine map followed by an activation: Z = f(W X + b).
/// An empty bias vector means the layer has no bias parameters.
struct Layer {
  Matrix weight;
  Vector bias;
  Activation activation = Activation::identity;

  bool has_bias() const noexcept { return bias.size() > 0; }
  std::size_t parameter_count() const noexcept {
    return static_cast<std::size_t>(weight.size() + bias.size());
  }
};

struct NetworkSpec {
  Mode mode = Mode::real;
  std::vector<Layer> layers;

  /// Throws ShapeError when adjacent layers do not compose and ContractError
  /// when a layer is incompatible with the number field.
  void validate() const;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
};

struct LayerTensors {
  Matrix weight;
  Vector bias;
};

/// Per-layer tensors shaped like the parameters of a NetworkSpec. The tag
/// distinguishes covariant gradients from contravariant displacements.
template <class Tag>
struct Layerwise {
  Mode mode = Mode::real;
  std::vector<LayerTensors> layers;

  static Layerwise zeros_like(const NetworkSpec& net) {
    Layerwise out;
    out.mode = net.mode;
    out.layers.reserve(net.layers.size());
    for (const Layer& l : net.layers) {
      out.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
    return out;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const LayerTensors& t : layers) s += t.weight.squaredNorm() + t.bias.squaredNorm();
    return s;
  }

  double norm() const { return std::sqrt(squared_norm()); }

  bool finite() const {
    for (const LayerTensors& t : layers) {
      if (!all_finite(t.weight) || !all_finite(t.bias)) return false;
    }
    return true;
  }

  bool congruent_with(const NetworkSpec& net) const {
    if (layers.size() != net.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = net.layers[i];
      if (layers[i].weight.rows() != l.weight.rows() || layers[i].weight.cols() != l.weight.cols() ||
          layers[i].bias.size() != l.bias.size()) {
        return false;
      }
    }
    return true;
  }
};

struct GradientTag {};
struct DisplacementTag {};

/// dL/dW per layer in real mode; dL/d(conj W) in complex mode.
using Gradient = Layerwise<GradientTag>;
/// A contravariant (upper-index) change of parameters.
using Displacement = Layerwise<DisplacementTag>;

struct ForwardPass {
  Tape tape;
  NodeId output = 0;
  /// Weight and bias leaves, in layer order.
  std::vector<NodeId> parameters;

  const Matrix& value() const { return tape.value(output); }
};

/// Records Z_L = f_L(W_L(... f_1(W_1 X + b_1) ...) + b_L). Columns of
/// `inputs` are independent examples.
ForwardPass forward(const NetworkSpec& net, const Matrix& inputs);

/// Pulls the tape's scalar loss back onto the tagged network parameters.
Gradient pullback(const Tape& tape);

using NetworkLoss = std::function<double(const NetworkSpec&)>;

/// Central differences per parameter. Complex parameters are perturbed
/// along the real and imaginary axes and combined into the Wirtinger
/// derivative (dL/dx + i dL/dy) / 2.
Gradient finite_difference_gradient(const NetworkSpec& net, const NetworkLoss& loss, double h);

/// Parameter-wise difference `to - from`.
Displacement difference(const NetworkSpec& to, const NetworkSpec& from);

double parameter_norm(const NetworkSpec& net);

}  // namespace covgrad
