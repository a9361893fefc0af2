#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covgrad/errors.hpp"
#include "covgrad/losses.hpp"
#include "covgrad/metric.hpp"
#include "covgrad/network.hpp"
#include "covgrad/objective.hpp"
#include "random_models.hpp"

using namespace covgrad;

namespace {

Matrix hand_forward(const NetworkSpec& net, Matrix x) {
  for (const Layer& l : net.layers) {
    Matrix z = l.weight * x;
    if (l.has_bias()) z.colwise() += l.bias;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      Scalar& v = z.data()[i];
      switch (l.activation) {
        case Activation::identity: break;
        case Activation::sigmoid: v = 1.0 / (1.0 + std::exp(-v.real())); break;
        case Activation::relu: v = v.real() > 0.0 ? v.real() : 0.0; break;
        case Activation::tanh: v = {std::tanh(v.real()), std::tanh(v.imag())}; break;
      }
    }
    x = z;
  }
  return x;
}

}  // namespace

TEST(Network, SingleReluLayer) {
  NetworkSpec net;
  net.layers.push_back({Matrix{{1.0, -1.0}}, Vector::Zero(1), Activation::relu});
  const Matrix x{{2.0}, {3.0}};
  EXPECT_EQ(forward(net, x).value()(0, 0), Scalar(0.0));
}

TEST(Network, IdentityLayerPassesInputThrough) {
  NetworkSpec net;
  net.layers.push_back({Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity});
  const Matrix x{{1.5}, {-2.0}, {0.25}};
  EXPECT_EQ(forward(net, x).value(), x);
}

TEST(Network, MatchesHandComposition) {
  std::mt19937_64 gen(3);
  for (Mode mode : {Mode::real, Mode::complex}) {
    for (int trial = 0; trial < 20; ++trial) {
      const NetworkSpec net = fixtures::random_network(gen, mode, 2, 6);
      const Matrix x = fixtures::random_matrix(gen, mode, static_cast<Eigen::Index>(net.input_dim()), 3);
      const Matrix expected = hand_forward(net, x);
      EXPECT_LE((forward(net, x).value() - expected).norm(), 1e-12 * std::max(1.0, expected.norm()));
    }
  }
}

TEST(Network, ValidateRejectsBadShapesAndComplexRelu) {
  NetworkSpec net;
  net.layers.push_back({Matrix::Zero(3, 2), Vector::Zero(3), Activation::tanh});
  net.layers.push_back({Matrix::Zero(1, 4), Vector::Zero(1), Activation::identity});
  EXPECT_THROW(net.validate(), ShapeError);
  net.layers[1].weight = Matrix::Zero(1, 3);
  EXPECT_NO_THROW(net.validate());
  net.mode = Mode::complex;
  net.layers[0].activation = Activation::relu;
  EXPECT_THROW(net.validate(), ContractError);
}

TEST(Network, RealParametersInRealModeOnly) {
  NetworkSpec net;
  net.layers.push_back({Matrix::Constant(1, 1, Scalar(1.0, 1.0)), Vector(), Activation::identity});
  EXPECT_THROW(net.validate(), ContractError);
}

TEST(Network, FiniteDifferencesAreExactOnQuadratics) {
  NetworkSpec net;
  net.layers.push_back({Matrix::Constant(1, 1, 3.0), Vector(), Activation::identity});
  auto half_square = [](const NetworkSpec& n) { return 0.5 * std::norm(n.layers[0].weight(0, 0)); };
  EXPECT_NEAR(finite_difference_gradient(net, half_square, 1e-5).layers[0].weight(0, 0).real(), 3.0, 1e-9);

  NetworkSpec z;
  z.mode = Mode::complex;
  z.layers.push_back({Matrix::Constant(1, 1, Scalar(1.0, 2.0)), Vector(), Activation::identity});
  auto modulus = [](const NetworkSpec& n) { return std::norm(n.layers[0].weight(0, 0)); };
  const Scalar g = finite_difference_gradient(z, modulus, 1e-5).layers[0].weight(0, 0);
  EXPECT_NEAR(g.real(), 1.0, 1e-9);
  EXPECT_NEAR(g.imag(), 2.0, 1e-9);
}

TEST(Network, RealAndComplexAgreeAfterRaisingIndex) {
  // Same loss on the same real parameters: the complex pullback is the
  // Wirtinger half of the real one and the metric restores the factor 2.
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    NetworkSpec real = fixtures::random_network(gen, Mode::real, 3, 4);
    for (Layer& l : real.layers) {
      if (l.activation != Activation::tanh) l.activation = Activation::identity;
    }
    NetworkSpec cplx = real;
    cplx.mode = Mode::complex;
    const Batch batch = fixtures::random_regression_batch(gen, real, 3);
    const Gradient gr = batch_loss(real, batch, LossKind::euclidean).gradient;
    const Gradient gc = batch_loss(cplx, batch, LossKind::euclidean).gradient;
    const LayerMetric unit = LayerMetric::unit(real.layers.size());
    const Displacement ur = raise_index(unit, gr);
    const Displacement uc = raise_index(unit, gc);
    for (std::size_t l = 0; l < real.layers.size(); ++l) {
      EXPECT_EQ(ur.layers[l].weight, uc.layers[l].weight);
      EXPECT_EQ(ur.layers[l].bias, uc.layers[l].bias);
      EXPECT_TRUE(is_real(gc.layers[l].weight));
    }
  }
}

TEST(Network, FlattenAssignRoundTrip) {
  std::mt19937_64 gen(4);
  NetworkSpec net = fixtures::random_network(gen, Mode::real, 3, 5);
  const Eigen::VectorXd w = flatten(net);
  EXPECT_EQ(static_cast<std::size_t>(w.size()), net.parameter_count());
  NetworkSpec copy = net;
  assign(copy, Eigen::VectorXd::Zero(w.size()));
  EXPECT_EQ(parameter_norm(copy), 0.0);
  assign(copy, w);
  EXPECT_EQ(flatten(copy), w);
  EXPECT_THROW(assign(copy, Eigen::VectorXd::Zero(w.size() + 1)), ShapeError);
}
