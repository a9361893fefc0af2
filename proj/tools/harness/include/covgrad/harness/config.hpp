#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covgrad/losses.hpp"
#include "covgrad/metric.hpp"
#include "covgrad/optimizers.hpp"
#include "covgrad/oracles.hpp"
#include "covgrad/scalar.hpp"

namespace covgrad::harness {

enum class ModelKind { network, quadratic, quartic, double_well, constant };
enum class DataKind { none, regression, classification, logistic };

std::string_view to_string(ModelKind kind);
std::string_view to_string(DataKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::network;
  Mode mode = Mode::real;
  /// Layer widths including the input, e.g. {2, 4, 1}.
  std::vector<std::size_t> widths;
  /// One entry per layer, or a single entry applied to every layer.
  std::vector<Activation> activations{Activation::sigmoid};
  bool bias = true;
  double init_scale = 0.01;
  /// Explicit initial parameters in flatten() order; overrides random init.
  std::vector<double> init;
  /// Imaginary parts matching `init` in complex mode.
  std::vector<double> init_imag;
  // scalar model coefficients
  double curvature = 1.0;
  double center = 0.0;
  double alpha = 0.0;
  double value = 0.0;
};

struct DataConfig {
  DataKind kind = DataKind::none;
  std::optional<std::uint64_t> seed;
  std::size_t n = 100;
  std::size_t classes = 2;
  /// Input dimension of the generator; 0 means the model input width.
  std::size_t features = 0;
  double noise = 0.1;
  double slope = 1.0;
  double intercept = 0.0;
};

struct CensusConfig {
  std::size_t dimension = 3;
  std::size_t trials = 1000000;
  CensusModel model = CensusModel::independent_signs;
};

/// A fully validated experiment description.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  DataConfig data;
  std::optional<LossKind> loss;
  OptimizerKind optimizer = OptimizerKind::aristotle;
  Hyperparameters hyper;
  std::size_t steps = 100;
  std::map<std::size_t, Stiffness> metric;
  std::optional<double> lambda_sq;
  bool quadrature = false;
  double gradcheck_h = 1e-5;
  double oracle_tolerance = 1e-3;
  std::string trajectory_file = "trajectory.csv";
  std::size_t record_every = 1;
  CensusConfig census;

  std::uint64_t data_seed() const { return data.seed.value_or(seed); }
  LossKind loss_kind() const;
  LayerMetric layer_metric(std::size_t layers) const;
};

/// Parses `key = value` lines. Unknown keys, duplicate keys and malformed
/// values throw ConfigError naming the key and line.
ExperimentConfig parse_config(std::string_view text, std::string_view origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every accepted key; `metric.layer<i>` is listed as a pattern.
const std::vector<std::string>& schema_keys();

}  // namespace covgrad::harness
