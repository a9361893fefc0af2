#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "covgrad/scalar.hpp"

namespace covgrad {

using NodeId = std::size_t;

/// Marks a variable leaf as the weight or bias of a network layer so that a
/// pullback can be reassembled into per-layer gradients.
struct ParamTag {
  std::size_t layer = 0;
  bool bias = false;

  friend bool operator==(const ParamTag&, const ParamTag&) = default;
};

/// Gradient of the tape output with respect to every variable leaf.
///
/// Real mode holds dL/dW. Complex mode holds the Wirtinger derivative
/// dL/d(conj W) = (dL/dx + i dL/dy) / 2.
class TapeGradient {
 public:
  TapeGradient(Mode mode, std::vector<NodeId> variables, std::vector<Matrix> gradients);

  Mode mode() const noexcept { return mode_; }
  const std::vector<NodeId>& variables() const noexcept { return variables_; }
  const Matrix& of(NodeId variable) const;

 private:
  Mode mode_;
  std::vector<NodeId> variables_;
  std::vector<Matrix> gradients_;
};

/// Recorded forward computation over matrices of complex scalars.
///
/// Nodes are appended in evaluation order, so inputs always precede the
/// node that consumes them. Columns of a node value are independent batch
/// examples wherever that distinction matters (bias broadcast, softmax,
/// cross-entropy). Cotangents flow backwards as the conjugate cotangent
/// A = dL/dx + i dL/dy, which reduces to dL/dx for real data; every rule only
/// ever multiplies by Jacobian transposes, never by an inverse.
class Tape {
 public:
  explicit Tape(Mode mode);

  Mode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  NodeId constant(Matrix value);
  NodeId variable(Matrix value, std::optional<ParamTag> tag = std::nullopt);

  NodeId matmul(NodeId a, NodeId b);
  /// y + b 1^T with b a column vector matching the rows of y.
  NodeId add_bias(NodeId y, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  /// Elementwise product.
  NodeId mul(NodeId a, NodeId b);
  NodeId conj(NodeId a);
  NodeId scale(NodeId a, Scalar factor);
  /// Sum of all entries, as a 1x1 node.
  NodeId sum(NodeId a);
  /// Elementwise activation. tanh acts separately on real and imaginary
  /// parts; sigmoid and relu are real mode only.
  NodeId activate(NodeId a, Activation f);
  /// Column-wise softmax (real mode only).
  NodeId softmax(NodeId logits);
  /// -sum P log(Phat) over all entries, with 0 log 0 = 0 (real mode only).
  NodeId cross_entropy(NodeId probabilities, Matrix target);
  /// 1/2 sum |yhat - y|^2 over all entries.
  NodeId euclidean(NodeId yhat, Matrix target);
  /// Inserts a row of zeros above the value; used as the implicit reference
  /// logit of single-output classifiers.
  NodeId prepend_zero_row(NodeId a);

  void set_output(NodeId node);
  std::optional<NodeId> output() const noexcept { return output_; }

  const Matrix& value(NodeId node) const;
  std::optional<ParamTag> tag(NodeId node) const;
  bool is_variable(NodeId node) const;

  /// Value of the output node, which must be a real 1x1 scalar.
  double loss() const;

  /// Re-evaluates every node from the recorded leaves and returns the loss.
  double replay() const;

  /// Reverse sweep from the output node.
  TapeGradient pullback() const;

  /// True when both tapes hold the same nodes with bit-identical values.
  bool identical(const Tape& other) const;

 private:
  enum class Op {
    constant,
    variable,
    matmul,
    add_bias,
    add,
    sub,
    mul,
    conj,
    scale,
    sum,
    activate,
    softmax,
    cross_entropy,
    euclidean,
    prepend_zero_row,
  };

  struct Node {
    Op op = Op::constant;
    NodeId a = 0;
    NodeId b = 0;
    Matrix value;
    Matrix data;  // target for loss nodes
    Scalar factor{1.0, 0.0};
    Activation activation = Activation::identity;
    std::optional<ParamTag> tag;
  };

  NodeId push(Node node);
  void check_node(NodeId id) const;
  void require_real_mode(const char* op) const;
  Matrix evaluate(const Node& node, const Matrix* a, const Matrix* b) const;
  void check_scalar_output() const;

  Mode mode_;
  std::vector<Node> nodes_;
  std::optional<NodeId> output_;
};

}  // namespace covgrad
