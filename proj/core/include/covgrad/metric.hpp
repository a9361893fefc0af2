#pragma once

#include <cstddef>
#include <vector>

#include "covgrad/network.hpp"

namespace covgrad {

/// Stiffness of one layer. A scaled layer with covariant stiffness s has
/// contravariant metric 1/s; a frozen layer has contravariant metric 0
/// (infinite covariant stiffness) and never moves.
class Stiffness {
 public:
  static Stiffness frozen() { return Stiffness(true, 0.0); }
  /// Throws ArgumentError unless s is finite and positive.
  static Stiffness scaled(double s);

  bool is_frozen() const noexcept { return frozen_; }
  /// g_[ii]; +infinity when frozen.
  double covariant() const noexcept;
  /// g^[ii]; exactly 0 when frozen.
  double contravariant() const noexcept;

 private:
  Stiffness(bool frozen, double s) : frozen_(frozen), s_(s) {}

  bool frozen_;
  double s_;
};

/// Diagonal, per-layer metric on parameter space.
class LayerMetric {
 public:
  explicit LayerMetric(std::vector<Stiffness> layers);
  static LayerMetric unit(std::size_t layers);

  std::size_t size() const noexcept { return layers_.size(); }
  const Stiffness& operator[](std::size_t i) const { return layers_.at(i); }

  /// Largest |g^[ii] g_[ii] - 1| over non-frozen layers.
  double inverse_identity_defect() const;

 private:
  std::vector<Stiffness> layers_;
};

/// g^[ij] dL/dW^[j]. Complex mode applies the factor 2 from the
/// anti-diagonal z/conj(z) metric, so the result is 2 g^[ii] dL/d(conj W).
Displacement raise_index(const LayerMetric& metric, const Gradient& grad);

/// sum_i g_[ii] Tr(dW^[i]^H dW^[i]); equals |dz|^2 for a complex displacement
/// under the unit metric. Throws ContractError for any movement on a frozen layer.
double ds2(const LayerMetric& metric, const Displacement& dw);

/// Accumulates the length of a parameter-space path under a fixed metric.
class PathAccumulator {
 public:
  explicit PathAccumulator(NetworkSpec start);

  double length() const noexcept { return length_; }
  const NetworkSpec& snapshot() const noexcept { return snapshot_; }

  /// length += sqrt(ds2(metric, next - snapshot)); the snapshot becomes `next`.
  void accumulate(const LayerMetric& metric, const NetworkSpec& next);

 private:
  double length_ = 0.0;
  NetworkSpec snapshot_;
};

}  // namespace covgrad
