#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "covgrad/losses.hpp"
#include "covgrad/metric.hpp"
#include "covgrad/network.hpp"
#include "covgrad/objective.hpp"
#include "covgrad/optimizers.hpp"

namespace covgrad {

/// Loss and gradient of a network at its current parameters.
using LossFunction = std::function<LossAndGradient(const NetworkSpec&)>;

/// Flat real-parameter view of a network loss, for Hessian-based methods.
Objective network_objective(const NetworkSpec& shape, LossFunction loss);

struct TrajectoryRow {
  double t = 0.0;
  double loss = 0.0;
  double param_norm = 0.0;
  double grad_norm = 0.0;
  double path_length = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
  /// Set when a stepper reported divergence; iteration stopped there.
  std::optional<std::size_t> diverged_at;
  std::string divergence_message;
  std::size_t steps_taken = 0;

  bool diverged() const noexcept { return diverged_at.has_value(); }

  /// Header `t,loss,param_norm,grad_norm,path_length`, 17 significant digits.
  void write_csv(std::ostream& out) const;
};

struct TrajectoryOptions {
  OptimizerKind optimizer = OptimizerKind::aristotle;
  Hyperparameters hyper;
  std::size_t steps = 1;
  /// A row is kept every `record_every` steps; the final state is always kept.
  std::size_t record_every = 1;
};

/// Iterates the chosen stepper from the current parameters of `net`,
/// recording the loss, norms and accumulated metric path length.
TrajectoryRecord run_trajectory(NetworkSpec& net, const LossFunction& loss, const LayerMetric& metric,
                                const TrajectoryOptions& options);

TrajectoryRecord run_trajectory(NetworkSpec& net, const Batch& batch, LossKind kind,
                                const std::optional<RegularizerConfig>& reg, const LayerMetric& metric,
                                const TrajectoryOptions& options);

std::string format_double(double v);

}  // namespace covgrad
