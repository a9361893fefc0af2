#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covgrad/errors.hpp"
#include "covgrad/losses.hpp"
#include "covgrad/tape.hpp"
#include "random_models.hpp"

using namespace covgrad;

namespace {

Eigen::VectorXd random_logits(std::mt19937_64& gen, Eigen::Index n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(gen);
  return v;
}

ProbVector random_prob(std::mt19937_64& gen, Eigen::Index n) {
  std::gamma_distribution<double> gamma(1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = gamma(gen);
  return ProbVector(v / v.sum());
}

}  // namespace

TEST(Losses, Euclidean) {
  const Eigen::VectorXd y{{1.0, -2.0}};
  EXPECT_EQ(euclidean_loss(y, y), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_loss(Eigen::VectorXd{{0.0}}, Eigen::VectorXd{{1.0}}), 0.5);
  std::mt19937_64 gen(1);
  const Eigen::VectorXd a = random_logits(gen, 7, 1.0);
  const Eigen::VectorXd b = random_logits(gen, 7, 1.0);
  double brute = 0.0;
  for (Eigen::Index i = 0; i < 7; ++i) brute += 0.5 * (a[i] - b[i]) * (a[i] - b[i]);
  EXPECT_NEAR(euclidean_loss(a, b), brute, 1e-14);
  EXPECT_THROW(euclidean_loss(a, Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(Losses, ProbVectorValidates) {
  EXPECT_THROW(ProbVector(Eigen::VectorXd{{0.5, 0.6}}), DomainError);
  EXPECT_THROW(ProbVector(Eigen::VectorXd{{1.5, -0.5}}), DomainError);
  EXPECT_NO_THROW(ProbVector(Eigen::VectorXd{{0.25, 0.75}}));
}

TEST(Losses, SoftmaxExamples) {
  const ProbVector u = softmax(Eigen::VectorXd::Zero(3));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(u[i], 1.0 / 3.0, 1e-15);
  const ProbVector p = softmax(Eigen::VectorXd{{0.0, std::log(2.0)}});
  EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-15);
  const ProbVector big = softmax(Eigen::VectorXd{{1000.0, 1000.0}});
  EXPECT_EQ(big[0], 0.5);
  EXPECT_EQ(big[1], 0.5);
}

TEST(Losses, SoftmaxShiftInvariance) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> shift(-700.0, 700.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd y = random_logits(gen, 5, 3.0);
    const Eigen::VectorXd shifted = y.array() + shift(gen);
    EXPECT_LT((softmax(y).values() - softmax(shifted).values()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE((softmax(y).values().array() > 0.0).all());
  }
}

TEST(Losses, CrossEntropyExamples) {
  const ProbVector onehot(Eigen::VectorXd{{1.0, 0.0, 0.0}});
  EXPECT_EQ(cross_entropy(onehot, onehot), 0.0);
  EXPECT_NEAR(cross_entropy(ProbVector(Eigen::VectorXd{{1.0, 0.0}}), ProbVector(Eigen::VectorXd{{0.5, 0.5}})),
              std::log(2.0), 1e-15);
  const ProbVector uniform(Eigen::VectorXd::Constant(5, 0.2));
  EXPECT_NEAR(cross_entropy(uniform, uniform), std::log(5.0), 1e-14);
  EXPECT_THROW(cross_entropy(ProbVector(Eigen::VectorXd{{0.5, 0.5}}), onehot), ShapeError);
  EXPECT_THROW(cross_entropy(ProbVector(Eigen::VectorXd{{0.0, 1.0}}), ProbVector(Eigen::VectorXd{{1.0, 0.0}})),
               DomainError);
}

TEST(Losses, GibbsInequality) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    const ProbVector p = random_prob(gen, 4);
    const ProbVector q = random_prob(gen, 4);
    EXPECT_LE(cross_entropy(p, p), cross_entropy(p, q) + 1e-15);
  }
}

TEST(Losses, LogitGradientExamples) {
  std::mt19937_64 gen(4);
  const Eigen::VectorXd y = random_logits(gen, 4, 1.0);
  EXPECT_LT(cross_entropy_logit_gradient(softmax(y), y).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::VectorXd g = cross_entropy_logit_gradient(ProbVector(Eigen::VectorXd{{1.0, 0.0}}), Eigen::VectorXd::Zero(2));
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

TEST(Losses, LogitGradientMatchesPullback) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index a = 2 + trial % 6;
    const ProbVector p = random_prob(gen, a);
    const Eigen::VectorXd y = random_logits(gen, a, 2.0);
    Tape t(Mode::real);
    const NodeId logits = t.variable(Matrix(y.cast<Scalar>()));
    t.set_output(t.cross_entropy(t.softmax(logits), Matrix(p.values().cast<Scalar>())));
    const Eigen::VectorXd autodiff = t.pullback().of(logits).col(0).real();
    EXPECT_LT((autodiff - cross_entropy_logit_gradient(p, y)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(t.loss(), cross_entropy(p, softmax(y)), 1e-12);
  }
}

TEST(Losses, BatchAveraging) {
  std::mt19937_64 gen(6);
  NetworkSpec net = fixtures::random_network(gen, Mode::real, 2, 4);
  Batch one = fixtures::random_regression_batch(gen, net, 1);
  Batch two;
  two.inputs = Matrix(one.inputs.rows(), 2);
  two.inputs << one.inputs, one.inputs;
  const Matrix& y = std::get<Matrix>(one.targets);
  Matrix yy(y.rows(), 2);
  yy << y, y;
  two.targets = yy;
  const double single = batch_loss(net, one, LossKind::euclidean).loss;
  EXPECT_NEAR(batch_loss(net, two, LossKind::euclidean).loss, single, 1e-15);
  const Eigen::VectorXd out = forward(net, one.inputs).value().col(0).real();
  EXPECT_NEAR(single, euclidean_loss(out, y.col(0).real()), 1e-15);
}

TEST(Losses, RegularizerIsExactSumOfSquares) {
  std::mt19937_64 gen(7);
  const NetworkSpec net = fixtures::random_network(gen, Mode::real, 2, 3);
  const Batch batch = fixtures::random_regression_batch(gen, net, 5);
  const RegularizerConfig reg{4.0, 5};
  EXPECT_DOUBLE_EQ(reg.coefficient(), 1.0 / 40.0);
  const double l0 = batch_loss(net, batch, LossKind::euclidean).loss;
  const double l1 = batch_loss(net, batch, LossKind::euclidean, reg).loss;
  EXPECT_NEAR(l1 - l0, parameter_norm(net) * parameter_norm(net) * reg.coefficient(), 1e-14);

  NetworkSpec zero = net;
  for (Layer& l : zero.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  EXPECT_EQ(batch_loss(zero, batch, LossKind::euclidean, reg).loss, batch_loss(zero, batch, LossKind::euclidean).loss);
  EXPECT_THROW((RegularizerConfig{0.0, 5}.validate()), ConfigError);
}

TEST(Losses, BinaryClassifierPinsReferenceLogit) {
  NetworkSpec net;
  net.layers.push_back({Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Activation::identity});
  Batch b;
  b.inputs = Matrix{{0.5, -1.0}};
  b.targets = ClassLabels{1, 0};
  // logits [0, 1] and [0, -2]
  const double expected = 0.5 * (std::log1p(std::exp(-1.0)) + std::log1p(std::exp(-2.0)));
  EXPECT_NEAR(batch_loss(net, b, LossKind::cross_entropy).loss, expected, 1e-15);
  EXPECT_EQ(b.class_counts(2), (std::vector<std::size_t>{1, 1}));
}

TEST(Losses, CrossEntropyIsRealModeOnly) {
  NetworkSpec net;
  net.mode = Mode::complex;
  net.layers.push_back({Matrix::Constant(2, 1, 1.0), Vector(), Activation::identity});
  Batch b;
  b.inputs = Matrix::Constant(1, 1, 1.0);
  b.targets = ClassLabels{0};
  EXPECT_THROW(batch_loss(net, b, LossKind::cross_entropy), ContractError);
}
