#include <benchmark/benchmark.h>

#include <random>

#include "covgrad/evidence.hpp"
#include "covgrad/losses.hpp"
#include "covgrad/optimizers.hpp"
#include "covgrad/oracles.hpp"
#include "covgrad/trajectory.hpp"
#include "random_models.hpp"

using namespace covgrad;

namespace {

NetworkSpec mlp(Mode mode, std::size_t width, std::size_t depth) {
  std::mt19937_64 gen(1);
  NetworkSpec net;
  net.mode = mode;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto w = static_cast<Eigen::Index>(width);
    net.layers.push_back({fixtures::random_matrix(gen, mode, w, w, 0.3), fixtures::random_matrix(gen, mode, w, 1).col(0),
                          Activation::tanh});
  }
  return net;
}

void BM_BatchLossAndGradient(benchmark::State& state) {
  const Mode mode = state.range(0) == 0 ? Mode::real : Mode::complex;
  const NetworkSpec net = mlp(mode, static_cast<std::size_t>(state.range(1)), 3);
  std::mt19937_64 gen(2);
  const Batch batch = fixtures::random_regression_batch(gen, net, 64);
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss(net, batch, LossKind::euclidean));
}
BENCHMARK(BM_BatchLossAndGradient)->Args({0, 8})->Args({0, 32})->Args({1, 8})->Args({1, 32});

void BM_FiniteDifferenceGradient(benchmark::State& state) {
  const NetworkSpec net = mlp(Mode::real, 8, 3);
  std::mt19937_64 gen(3);
  const Batch batch = fixtures::random_regression_batch(gen, net, 16);
  const NetworkLoss loss = [&](const NetworkSpec& n) { return batch_loss(n, batch, LossKind::euclidean).loss; };
  for (auto _ : state) benchmark::DoNotOptimize(finite_difference_gradient(net, loss, 1e-5));
}
BENCHMARK(BM_FiniteDifferenceGradient);

void BM_Stepper(benchmark::State& state) {
  const auto kind = static_cast<OptimizerKind>(state.range(0));
  NetworkSpec net = mlp(Mode::real, 16, 3);
  const LayerMetric metric = LayerMetric::unit(3);
  Gradient g = Gradient::zeros_like(net);
  for (auto& l : g.layers) {
    l.weight.setConstant(1e-3);
    l.bias.setConstant(1e-3);
  }
  OptimizerState s = OptimizerState::for_network(net, Hyperparameters{});
  for (auto _ : state) {
    switch (kind) {
      case OptimizerKind::aristotle: step_aristotle(net, metric, g, s); break;
      case OptimizerKind::momentum: step_momentum(net, metric, g, s); break;
      default: step_damped(net, metric, g, s); break;
    }
  }
}
BENCHMARK(BM_Stepper)->Arg(0)->Arg(1)->Arg(2);

Objective random_quadratic(Eigen::Index k) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd b(k, k);
  for (auto& x : b.reshaped()) x = normal(gen);
  const Eigen::MatrixXd a = b * b.transpose() / static_cast<double>(k) + Eigen::MatrixXd::Identity(k, k);
  return Objective(static_cast<std::size_t>(k), [a](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
    if (g != nullptr) *g = a * w;
    return 0.5 * w.dot(a * w);
  });
}

void BM_CogradientStep(benchmark::State& state) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  const Objective obj = random_quadratic(k);
  for (auto _ : state) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(k);
    benchmark::DoNotOptimize(step_cogradient(w, obj, 1.0));
  }
}
BENCHMARK(BM_CogradientStep)->Arg(4)->Arg(16)->Arg(64);

void BM_LaplaceEvidence(benchmark::State& state) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  const Objective obj = random_quadratic(k);
  for (auto _ : state) benchmark::DoNotOptimize(laplace_evidence(obj, 1000, 10.0, Eigen::VectorXd::Ones(k)));
}
BENCHMARK(BM_LaplaceEvidence)->Arg(2)->Arg(16);

void BM_Quadrature(benchmark::State& state) {
  const Objective obj = random_quadratic(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(quadrature_evidence(obj, 100, 1.0));
}
BENCHMARK(BM_Quadrature)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SaddleCensus(benchmark::State& state) {
  const auto model = state.range(0) == 0 ? CensusModel::independent_signs : CensusModel::random_symmetric;
  for (auto _ : state) benchmark::DoNotOptimize(saddle_census(8, 100000, model, 5));
}
BENCHMARK(BM_SaddleCensus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
