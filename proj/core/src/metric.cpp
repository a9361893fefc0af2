#include "covgrad/metric.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "covgrad/errors.hpp"

namespace covgrad {

Stiffness Stiffness::scaled(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ArgumentError("layer stiffness must be finite and positive, got " + std::to_string(s));
  }
  return Stiffness(false, s);
}

double Stiffness::covariant() const noexcept {
  return frozen_ ? std::numeric_limits<double>::infinity() : s_;
}

double Stiffness::contravariant() const noexcept { return frozen_ ? 0.0 : 1.0 / s_; }

LayerMetric::LayerMetric(std::vector<Stiffness> layers) : layers_(std::move(layers)) {}

LayerMetric LayerMetric::unit(std::size_t layers) {
  return LayerMetric(std::vector<Stiffness>(layers, Stiffness::scaled(1.0)));
}

double LayerMetric::inverse_identity_defect() const {
  double worst = 0.0;
  for (const Stiffness& s : layers_) {
    if (s.is_frozen()) continue;
    worst = std::max(worst, std::abs(s.contravariant() * s.covariant() - 1.0));
  }
  return worst;
}

Displacement raise_index(const LayerMetric& metric, const Gradient& grad) {
  if (metric.size() != grad.layers.size()) {
    throw ShapeError("raise_index: metric has " + std::to_string(metric.size()) + " layers, gradient " +
                     std::to_string(grad.layers.size()));
  }
  const double conjugate_factor = grad.mode == Mode::complex ? 2.0 : 1.0;
  Displacement out;
  out.mode = grad.mode;
  out.layers.reserve(grad.layers.size());
  for (std::size_t i = 0; i < grad.layers.size(); ++i) {
    const LayerTensors& g = grad.layers[i];
    if (metric[i].is_frozen()) {
      out.layers.push_back({Matrix::Zero(g.weight.rows(), g.weight.cols()), Vector::Zero(g.bias.size())});
      continue;
    }
    const double up = conjugate_factor * metric[i].contravariant();
    out.layers.push_back({g.weight * up, g.bias * up});
  }
  return out;
}

double ds2(const LayerMetric& metric, const Displacement& dw) {
  if (metric.size() != dw.layers.size()) {
    throw ShapeError("ds2: metric has " + std::to_string(metric.size()) + " layers, displacement " +
                     std::to_string(dw.layers.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dw.layers.size(); ++i) {
    // Tr(dW^H dW) is the squared Frobenius norm.
    const double frob = dw.layers[i].weight.squaredNorm() + dw.layers[i].bias.squaredNorm();
    if (metric[i].is_frozen()) {
      if (frob != 0.0) throw ContractError("ds2: layer " + std::to_string(i) + " is frozen but was displaced");
      continue;
    }
    total += metric[i].covariant() * frob;
  }
  return total;
}

PathAccumulator::PathAccumulator(NetworkSpec start) : snapshot_(std::move(start)) {}

void PathAccumulator::accumulate(const LayerMetric& metric, const NetworkSpec& next) {
  length_ += std::sqrt(ds2(metric, difference(next, snapshot_)));
  snapshot_ = next;
}

}  // namespace covgrad
