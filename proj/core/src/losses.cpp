#include "covgrad/losses.hpp"

#include <cmath>
#include <string>

#include "covgrad/errors.hpp"

namespace covgrad {

ProbVector::ProbVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw DomainError("probability vector is empty");
  if ((values_.array() < 0.0).any() || !values_.allFinite()) {
    throw DomainError("probability vector has negative or non-finite entries");
  }
  if (std::abs(values_.sum() - 1.0) > 1e-12) {
    throw DomainError("probability vector sums to " + std::to_string(values_.sum()));
  }
}

double euclidean_loss(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) {
  if (yhat.size() != y.size()) {
    throw ShapeError("euclidean_loss: prediction has " + std::to_string(yhat.size()) + " entries, target " +
                     std::to_string(y.size()));
  }
  return 0.5 * (y - yhat).squaredNorm();
}

ProbVector softmax(const Eigen::VectorXd& yhat) {
  if (yhat.size() == 0) throw ArgumentError("softmax of an empty vector");
  if (!yhat.allFinite()) throw ArgumentError("softmax of non-finite logits");
  const Eigen::ArrayXd e = (yhat.array() - yhat.maxCoeff()).exp();
  Eigen::VectorXd p = e / e.sum();
  // Renormalise the last ulp so the sum invariant holds for any length.
  p /= p.sum();
  return ProbVector(std::move(p));
}

double cross_entropy(const ProbVector& p, const ProbVector& phat) {
  if (p.size() != phat.size()) throw ShapeError("cross_entropy: class counts differ");
  double total = 0.0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    if (p[a] == 0.0) continue;
    if (phat[a] == 0.0) {
      throw DomainError("cross_entropy: class " + std::to_string(a) + " has zero predicted probability");
    }
    total -= p[a] * std::log(phat[a]);
  }
  return total;
}

Eigen::VectorXd cross_entropy_logit_gradient(const ProbVector& p, const Eigen::VectorXd& yhat) {
  if (p.size() != yhat.size()) throw ShapeError("cross_entropy_logit_gradient: class counts differ");
  return softmax(yhat).values() - p.values();
}

void Batch::validate() const {
  if (inputs.cols() == 0) throw ContractError("batch holds no examples");
  if (const auto* y = std::get_if<Matrix>(&targets)) {
    if (y->cols() != inputs.cols()) {
      throw ShapeError("batch has " + std::to_string(inputs.cols()) + " inputs but " + std::to_string(y->cols()) +
                       " regression targets");
    }
  } else {
    const auto& labels = std::get<ClassLabels>(targets);
    if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
      throw ShapeError("batch has " + std::to_string(inputs.cols()) + " inputs but " +
                       std::to_string(labels.size()) + " class labels");
    }
  }
}

std::vector<std::size_t> Batch::class_counts(std::size_t classes) const {
  const auto* labels = std::get_if<ClassLabels>(&targets);
  if (labels == nullptr) throw ContractError("class_counts needs class targets");
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t a : *labels) {
    if (a >= classes) throw ArgumentError("class label " + std::to_string(a) + " out of range");
    ++counts[a];
  }
  return counts;
}

void RegularizerConfig::validate() const {
  if (!(lambda_sq > 0.0) || !std::isfinite(lambda_sq)) throw ConfigError("regularizer lambda_sq must be positive");
  if (n == 0) throw ConfigError("regularizer needs N >= 1");
}

NodeId attach_loss(Tape& tape, NodeId output, const Batch& batch, LossKind kind) {
  batch.validate();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const Matrix& yhat = tape.value(output);
  if (kind == LossKind::euclidean) {
    const auto* y = std::get_if<Matrix>(&batch.targets);
    if (y == nullptr) throw ContractError("euclidean loss needs regression targets");
    return tape.scale(tape.euclidean(output, *y), inv_n);
  }
  const auto* labels = std::get_if<ClassLabels>(&batch.targets);
  if (labels == nullptr) throw ContractError("cross-entropy loss needs class labels");
  NodeId logits = output;
  if (yhat.rows() == 1) logits = tape.prepend_zero_row(output);
  const Eigen::Index classes = tape.value(logits).rows();
  Matrix target = Matrix::Zero(classes, yhat.cols());
  for (std::size_t j = 0; j < labels->size(); ++j) {
    const std::size_t a = (*labels)[j];
    if (static_cast<Eigen::Index>(a) >= classes) {
      throw ContractError("class label " + std::to_string(a) + " exceeds the " + std::to_string(classes) +
                          " network outputs");
    }
    target(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return tape.scale(tape.cross_entropy(tape.softmax(logits), std::move(target)), inv_n);
}

NodeId attach_regularizer(Tape& tape, const std::vector<NodeId>& parameters, const RegularizerConfig& reg) {
  reg.validate();
  NodeId total = tape.constant(Matrix::Zero(1, 1));
  for (NodeId p : parameters) {
    total = tape.add(total, tape.sum(tape.mul(p, tape.conj(p))));
  }
  return tape.scale(total, reg.coefficient());
}

LossAndGradient batch_loss(const NetworkSpec& net, const Batch& batch, LossKind kind,
                           const std::optional<RegularizerConfig>& reg) {
  ForwardPass pass = forward(net, batch.inputs);
  NodeId loss = attach_loss(pass.tape, pass.output, batch, kind);
  if (reg) loss = pass.tape.add(loss, attach_regularizer(pass.tape, pass.parameters, *reg));
  pass.tape.set_output(loss);
  LossAndGradient out{pass.tape.loss(), pullback(pass.tape)};
  if (out.gradient.layers.size() < net.layers.size()) out.gradient.layers.resize(net.layers.size());
  return out;
}

}  // namespace covgrad
