#include "covgrad/trajectory.hpp"

#include <cmath>
#include <cstdio>

#include "covgrad/errors.hpp"

namespace covgrad {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void TrajectoryRecord::write_csv(std::ostream& out) const {
  out << "t,loss,param_norm,grad_norm,path_length\n";
  for (const TrajectoryRow& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.loss) << ',' << format_double(r.param_norm) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.path_length) << '\n';
  }
}

Objective network_objective(const NetworkSpec& shape, LossFunction loss) {
  if (shape.mode != Mode::real) throw ContractError("network_objective: complex networks have no flat real form");
  return Objective(shape.parameter_count(),
                   [shape, loss = std::move(loss)](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
                     NetworkSpec net = shape;
                     assign(net, w);
                     const LossAndGradient lg = loss(net);
                     if (grad != nullptr) *grad = flatten(lg.gradient);
                     return lg.loss;
                   });
}

TrajectoryRecord run_trajectory(NetworkSpec& net, const LossFunction& loss, const LayerMetric& metric,
                                const TrajectoryOptions& options) {
  if (options.steps < 1) throw ArgumentError("run_trajectory needs at least one step");
  if (options.record_every < 1) throw ArgumentError("record_every must be at least 1");
  if (metric.size() != net.layers.size()) throw ShapeError("metric and network layer counts differ");
  options.hyper.validate(options.optimizer);
  net.validate();

  TrajectoryRecord record;
  OptimizerState state = OptimizerState::for_network(net, options.hyper);
  PathAccumulator path(net);
  std::optional<Objective> objective;
  if (options.optimizer == OptimizerKind::cogradient) objective = network_objective(net, loss);

  for (std::size_t k = 0;; ++k) {
    const LossAndGradient lg = loss(net);
    const bool last = k == options.steps;
    if (k % options.record_every == 0 || last) {
      record.rows.push_back({static_cast<double>(k) * options.hyper.dt, lg.loss, parameter_norm(net),
                             lg.gradient.norm(), path.length()});
    }
    if (!std::isfinite(lg.loss) || std::abs(lg.loss) > kDivergenceThreshold) {
      record.diverged_at = k;
      record.divergence_message = "loss left the finite range";
      break;
    }
    if (last) break;
    try {
      switch (options.optimizer) {
        case OptimizerKind::aristotle: step_aristotle(net, metric, lg.gradient, state); break;
        case OptimizerKind::momentum: step_momentum(net, metric, lg.gradient, state); break;
        case OptimizerKind::damped: step_damped(net, metric, lg.gradient, state); break;
        case OptimizerKind::cogradient: step_cogradient(net, metric, *objective, state); break;
      }
    } catch (const DivergenceError& e) {
      record.diverged_at = e.step();
      record.divergence_message = e.what();
      break;
    }
    path.accumulate(metric, net);
    record.steps_taken = k + 1;
  }
  return record;
}

TrajectoryRecord run_trajectory(NetworkSpec& net, const Batch& batch, LossKind kind,
                                const std::optional<RegularizerConfig>& reg, const LayerMetric& metric,
                                const TrajectoryOptions& options) {
  batch.validate();
  return run_trajectory(
      net, [&](const NetworkSpec& n) { return batch_loss(n, batch, kind, reg); }, metric, options);
}

}  // namespace covgrad
