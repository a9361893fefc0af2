#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covgrad/errors.hpp"
#include "covgrad/network.hpp"
#include "covgrad/tape.hpp"
#include "random_models.hpp"

using namespace covgrad;

namespace {

Matrix scalar(Scalar v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST(Tape, HalfSquareHasGradientW) {
  Tape t(Mode::real);
  const NodeId w = t.variable(scalar(3.0));
  t.set_output(t.scale(t.mul(w, w), 0.5));
  EXPECT_DOUBLE_EQ(t.loss(), 4.5);
  EXPECT_DOUBLE_EQ(t.pullback().of(w)(0, 0).real(), 3.0);
}

TEST(Tape, WirtingerOfModulusSquared) {
  Tape t(Mode::complex);
  const NodeId z = t.variable(scalar({1.0, 2.0}));
  t.set_output(t.mul(z, t.conj(z)));
  EXPECT_DOUBLE_EQ(t.loss(), 5.0);
  const Scalar g = t.pullback().of(z)(0, 0);
  EXPECT_DOUBLE_EQ(g.real(), 1.0);
  EXPECT_DOUBLE_EQ(g.imag(), 2.0);
}

TEST(Tape, MatmulEuclideanGradient) {
  std::mt19937_64 gen(5);
  const Matrix w = fixtures::random_matrix(gen, Mode::real, 3, 4);
  const Matrix x = fixtures::random_matrix(gen, Mode::real, 4, 2);
  const Matrix y = fixtures::random_matrix(gen, Mode::real, 3, 2);
  Tape t(Mode::real);
  const NodeId wn = t.variable(w);
  t.set_output(t.euclidean(t.matmul(wn, t.constant(x)), y));
  const Matrix expected = (w * x - y) * x.transpose();
  EXPECT_LT((t.pullback().of(wn) - expected).norm(), 1e-12);
}

TEST(Tape, ReplayIsBitExact) {
  std::mt19937_64 gen(9);
  const NetworkSpec net = fixtures::random_network(gen, Mode::real, 3, 5);
  const Batch batch = fixtures::random_regression_batch(gen, net, 4);
  ForwardPass pass = forward(net, batch.inputs);
  pass.tape.set_output(pass.tape.euclidean(pass.output, std::get<Matrix>(batch.targets)));
  const double loss = pass.tape.loss();
  EXPECT_EQ(std::bit_cast<std::uint64_t>(pass.tape.replay()), std::bit_cast<std::uint64_t>(loss));
}

TEST(Tape, IdenticalInputsGiveIdenticalTapes) {
  std::mt19937_64 gen(10);
  const NetworkSpec net = fixtures::random_network(gen, Mode::complex, 3, 6);
  const Matrix x = fixtures::random_matrix(gen, Mode::complex, static_cast<Eigen::Index>(net.input_dim()), 3);
  const ForwardPass a = forward(net, x);
  const ForwardPass b = forward(net, x);
  EXPECT_TRUE(a.tape.identical(b.tape));
  NetworkSpec moved = net;
  moved.layers[0].weight(0, 0) += 1e-12;
  EXPECT_FALSE(a.tape.identical(forward(moved, x).tape));
}

TEST(Tape, ShapeMismatchThrows) {
  Tape t(Mode::real);
  const NodeId a = t.constant(Matrix::Zero(2, 3));
  const NodeId b = t.constant(Matrix::Zero(2, 3));
  EXPECT_THROW(t.matmul(a, b), ShapeError);
  EXPECT_THROW(t.add(a, t.constant(Matrix::Zero(3, 2))), ShapeError);
}

TEST(Tape, LossMustBeRealScalar) {
  Tape t(Mode::complex);
  const NodeId z = t.variable(scalar({1.0, 1.0}));
  t.set_output(t.mul(z, z));
  EXPECT_THROW(t.loss(), ContractError);
  Tape u(Mode::real);
  u.set_output(u.variable(Matrix::Zero(2, 1)));
  EXPECT_THROW(u.loss(), ContractError);
}

TEST(Tape, RealOnlyOpsRejectComplexMode) {
  Tape t(Mode::complex);
  const NodeId z = t.variable(scalar({1.0, 0.0}));
  EXPECT_THROW(t.activate(z, Activation::relu), ContractError);
  EXPECT_THROW(t.activate(z, Activation::sigmoid), ContractError);
  EXPECT_THROW(t.softmax(z), ContractError);
}

TEST(Tape, ReluSubgradientAtZeroIsZero) {
  Tape t(Mode::real);
  const NodeId w = t.variable(scalar(0.0));
  t.set_output(t.activate(w, Activation::relu));
  EXPECT_EQ(t.pullback().of(w)(0, 0), Scalar(0.0));
}

TEST(Tape, SplitTanhActsOnBothParts) {
  Tape t(Mode::complex);
  const NodeId z = t.variable(scalar({0.3, -0.7}));
  const NodeId y = t.activate(z, Activation::tanh);
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0).real(), std::tanh(0.3));
  EXPECT_DOUBLE_EQ(t.value(y)(0, 0).imag(), std::tanh(-0.7));
}

TEST(Tape, ComplexPullbackMatchesAxisDifferences) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const NetworkSpec net = fixtures::random_network(gen, Mode::complex, 3, 4);
    const Batch batch = fixtures::random_regression_batch(gen, net, 3);
    auto loss = [&](const NetworkSpec& n) {
      ForwardPass p = forward(n, batch.inputs);
      p.tape.set_output(p.tape.euclidean(p.output, std::get<Matrix>(batch.targets)));
      return p.tape.loss();
    };
    ForwardPass p = forward(net, batch.inputs);
    p.tape.set_output(p.tape.euclidean(p.output, std::get<Matrix>(batch.targets)));
    const Gradient auto_g = pullback(p.tape);
    const Gradient fd = finite_difference_gradient(net, loss, 1e-5);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const double scale = std::max(1.0, auto_g.layers[l].weight.cwiseAbs().maxCoeff());
      EXPECT_LT((auto_g.layers[l].weight - fd.layers[l].weight).cwiseAbs().maxCoeff() / scale, 1e-6);
      EXPECT_LT((auto_g.layers[l].bias - fd.layers[l].bias).cwiseAbs().maxCoeff() / scale, 1e-6);
    }
  }
}
