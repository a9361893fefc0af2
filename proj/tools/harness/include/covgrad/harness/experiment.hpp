#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covgrad/harness/config.hpp"
#include "covgrad/losses.hpp"
#include "covgrad/network.hpp"
#include "covgrad/objective.hpp"
#include "covgrad/trajectory.hpp"

namespace covgrad::harness {

struct SyntheticDataset {
  /// Inputs carry every generated feature; models read the leading rows.
  Batch batch;
  std::size_t features = 0;
  /// n_a per class, empty for regression data.
  std::vector<std::size_t> class_counts;

  /// Empirical P_a = n_a / N.
  std::vector<double> class_frequencies() const;
};

/// Seeded generator: Gaussian clusters for classification, a logistic
/// model on the first feature for binary labels, or noisy linear targets.
SyntheticDataset make_dataset(const DataConfig& data, std::uint64_t seed, std::size_t input_width,
                              std::size_t output_width, Mode mode);

/// A trainable model: initial parameters and the loss on its data.
struct Model {
  NetworkSpec net;
  /// Loss with gradient; includes the regularizer when one is configured.
  LossFunction loss;
  /// The data term L0 alone.
  LossFunction data_loss;
  std::optional<SyntheticDataset> data;
  /// Constant term of a parameterless model.
  std::optional<double> constant;

  std::size_t parameter_count() const { return constant ? 0 : net.parameter_count(); }
  NetworkLoss value() const;
  /// L0 over flatten(net); real mode only.
  Objective objective() const;
  Eigen::VectorXd initial_point() const;
};

/// Builds data and initial parameters. Throws ConfigError when explicit
/// initial values do not fit the model.
Model build_model(const ExperimentConfig& config);

struct GradcheckResult {
  double max_error = 0.0;
  std::string worst;
  double worst_autodiff = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  /// Coordinates skipped because the loss has a kink there.
  std::size_t exempt = 0;
};

/// Compares autodiff against central differences coordinate by coordinate.
/// The error of a coordinate is |a - f| / max(|a|_inf, |f|_inf). With
/// `kink_exemption`, coordinates whose one-sided differences disagree are
/// skipped.
GradcheckResult gradient_check(const NetworkSpec& net, const LossFunction& loss, const NetworkLoss& value, double h,
                               bool kink_exemption);

struct SelectionRow {
  std::size_t n = 0;
  std::size_t seeds = 0;
  /// Seeds whose delta L2 prefers the first model.
  std::size_t first_preferred = 0;
  std::size_t bic_first_preferred = 0;
  std::size_t failures = 0;

  double rate() const { return seeds == 0 ? 0.0 : static_cast<double>(first_preferred) / static_cast<double>(seeds); }
};

/// Repeats the comparison of two models over data seeds 0..seeds-1 at each N.
/// Seeds whose Laplace evaluation fails count as failures, not preferences.
std::vector<SelectionRow> selection_study(const ExperimentConfig& first, const ExperimentConfig& second,
                                          const std::vector<std::size_t>& ns, std::size_t seeds);

}  // namespace covgrad::harness
