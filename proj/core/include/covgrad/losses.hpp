#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "covgrad/network.hpp"

namespace covgrad {

/// Non-negative entries summing to one.
class ProbVector {
 public:
  /// Throws DomainError unless entries are non-negative and sum to 1 within 1e-12.
  explicit ProbVector(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index a) const { return values_[a]; }

 private:
  Eigen::VectorXd values_;
};

/// 1/2 sum (y - yhat)^2. Its derivative with respect to yhat is (yhat - y).
double euclidean_loss(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y);

/// exp(yhat_a) / sum_b exp(yhat_b), evaluated after subtracting max(yhat).
ProbVector softmax(const Eigen::VectorXd& yhat);

/// -sum_a P_a log(Phat_a), with 0 log 0 = 0.
double cross_entropy(const ProbVector& p, const ProbVector& phat);

/// Analytic dL/dyhat of cross_entropy(p, softmax(yhat)): softmax(yhat) - p.
Eigen::VectorXd cross_entropy_logit_gradient(const ProbVector& p, const Eigen::VectorXd& yhat);

enum class LossKind { euclidean, cross_entropy };

using ClassLabels = std::vector<std::size_t>;

/// Training examples as columns of `inputs`. Targets are regression vectors
/// (columns of a matrix) for the Euclidean loss or class indices for
/// cross-entropy.
struct Batch {
  Matrix inputs;
  std::variant<Matrix, ClassLabels> targets;

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
  void validate() const;
  /// n_a per class; requires class targets.
  std::vector<std::size_t> class_counts(std::size_t classes) const;
};

/// Gaussian prior of variance lambda_sq over N examples: adds
/// sum |W|^2 / (2 N lambda_sq) to the averaged loss.
struct RegularizerConfig {
  double lambda_sq = 1.0;
  std::size_t n = 1;

  void validate() const;
  double coefficient() const { return 1.0 / (2.0 * static_cast<double>(n) * lambda_sq); }
};

/// Records the batch-averaged loss of `output` on the tape. A single-output
/// network under cross-entropy is a binary classifier whose class-0 logit is
/// pinned at zero.
NodeId attach_loss(Tape& tape, NodeId output, const Batch& batch, LossKind kind);

/// Records sum over `parameters` of |W|^2 * reg.coefficient().
NodeId attach_regularizer(Tape& tape, const std::vector<NodeId>& parameters, const RegularizerConfig& reg);

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

/// (1/N) sum_X L(X, W) plus the optional regularizer, with its gradient.
LossAndGradient batch_loss(const NetworkSpec& net, const Batch& batch, LossKind kind,
                           const std::optional<RegularizerConfig>& reg = std::nullopt);

}  // namespace covgrad
