#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covgrad/errors.hpp"
#include "covgrad/evidence.hpp"

using namespace covgrad;

namespace {

Objective quadratic(const Eigen::MatrixXd& a, const Eigen::VectorXd& center) {
  return Objective(static_cast<std::size_t>(a.rows()), [a, center](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
    const Eigen::VectorXd d = w - center;
    if (g != nullptr) *g = a * d;
    return 0.5 * d.dot(a * d);
  });
}

Objective quadratic(const Eigen::MatrixXd& a) { return quadratic(a, Eigen::VectorXd::Zero(a.rows())); }

/// L0 = a w^2 / 2 + b w^4 / 4
Objective perturbed(double a, double b) {
  return Objective(1, [a, b](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
    const double x = w[0];
    if (g != nullptr) *g = Eigen::VectorXd::Constant(1, a * x + b * x * x * x);
    return 0.5 * a * x * x + 0.25 * b * x * x * x * x;
  });
}

Eigen::MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index k) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(k, k);
  for (auto& x : q.reshaped()) x = normal(gen);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  const Eigen::MatrixXd basis = qr.householderQ();
  std::uniform_real_distribution<double> eig(1.0, 10.0);
  Eigen::VectorXd d(k);
  for (auto& x : d) x = eig(gen);
  return basis * d.asDiagonal() * basis.transpose();
}

}  // namespace

TEST(Evidence, HessianOfQuadratic) {
  const HessianMatrix h = hessian(quadratic(Eigen::MatrixXd::Constant(1, 1, 3.0)), Eigen::VectorXd::Zero(1), 100, 1.0);
  EXPECT_NEAR(h.values(0, 0), 3.01, 1e-9);
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd a = random_spd(gen, 5);
  const HessianMatrix h5 = hessian(quadratic(a), Eigen::VectorXd::Ones(5), 10, 2.0);
  EXPECT_LT((h5.values - a - Eigen::MatrixXd::Identity(5, 5) / 20.0).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(h5.values, h5.values.transpose());
}

TEST(Evidence, WorkedExample) {
  const Objective l0 = quadratic(Eigen::MatrixXd::Constant(1, 1, 3.0));
  const LaplaceReport r = laplace_evidence(l0, 100, 100.0, Eigen::VectorXd::Constant(1, 0.7));
  const double expected = 0.5 * std::log(100.0) / 100.0 + std::log(std::sqrt(3.0001) / 0.1) / 100.0;
  EXPECT_NEAR(r.l2, expected, 1e-9);
  EXPECT_NEAR(r.l2, 0.05154492996711042, 1e-9);
  EXPECT_NEAR(r.log_sqrt_g, -std::log(10.0), 1e-15);
  EXPECT_NEAR(r.l2, r.l1 + 0.5 * std::log(100.0) / 100.0 + (r.log_sqrt_h - r.log_sqrt_g) / 100.0, 1e-15);
}

TEST(Evidence, NoParameters) {
  const Objective c(0, [](const Eigen::VectorXd&, Eigen::VectorXd* g) {
    if (g != nullptr) g->resize(0);
    return 0.375;
  });
  const LaplaceReport r = laplace_evidence(c, 50, 4.0, Eigen::VectorXd());
  EXPECT_EQ(r.k, 0u);
  EXPECT_EQ(r.l2, 0.375);
}

TEST(Evidence, DoublingLambdaAddsLogTwoPerParameter) {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd a = random_spd(gen, 3);
  const Objective l0 = quadratic(a, Eigen::VectorXd::Constant(3, 0.2));
  const std::size_t n = 200;
  const LaplaceReport r1 = laplace_evidence(l0, n, 1e4, Eigen::VectorXd::Zero(3));
  const LaplaceReport r2 = laplace_evidence(l0, n, 4e4, Eigen::VectorXd::Zero(3));
  EXPECT_NEAR(r2.l2 - r1.l2, 3.0 * std::log(2.0) / static_cast<double>(n), 1e-6);
}

TEST(Evidence, MinimizerShiftsTowardOrigin) {
  const Objective l0 = quadratic(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 1.0));
  const Eigen::VectorXd w1 = minimize_l1(l0, 10, 1.0, Eigen::VectorXd::Zero(1));
  // 2 (w - 1) + w / 10 = 0
  EXPECT_NEAR(w1[0], 2.0 / 2.1, 1e-10);
  const Eigen::VectorXd again = minimize_l1(l0, 10, 1.0, w1);
  EXPECT_EQ(again, w1);
}

TEST(Evidence, LaplaceMatchesGaussianIntegralForQuadratics) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 1 + trial % 6;
    const Eigen::MatrixXd a = random_spd(gen, k);
    const std::size_t n = 50;
    const double lambda_sq = 4.0;
    const LaplaceReport r = laplace_evidence(quadratic(a), n, lambda_sq, Eigen::VectorXd::Ones(k));
    // Direct Gaussian integral: lambda^-k (2 pi)^(-k/2) (2 pi / N)^(k/2) det(h)^(-1/2)
    const Eigen::MatrixXd h = a + Eigen::MatrixXd::Identity(k, k) / (static_cast<double>(n) * lambda_sq);
    const double kd = static_cast<double>(k);
    const double log_integral = -0.5 * kd * std::log(lambda_sq) - 0.5 * kd * std::log(static_cast<double>(n)) -
                                0.5 * std::log(h.determinant());
    EXPECT_NEAR(std::exp(-static_cast<double>(n) * r.l2) / std::exp(log_integral), 1.0, 1e-10);
  }
}

TEST(Evidence, SaddleIsRefused) {
  const Objective l0 = quadratic(Eigen::Vector2d(1.0, -1.0).asDiagonal());
  try {
    laplace_evidence(l0, 100, 1.0, Eigen::VectorXd::Zero(2));
    FAIL() << "expected SaddleError";
  } catch (const SaddleError& e) {
    EXPECT_LT(e.min_eigenvalue(), 0.0);
    EXPECT_GT(e.max_eigenvalue(), 0.0);
  }
}

TEST(Evidence, CompareExamples) {
  const Objective l0 = quadratic(Eigen::MatrixXd::Constant(2, 2, 0.5) + Eigen::MatrixXd::Identity(2, 2));
  const LaplaceReport r = laplace_evidence(l0, 300, 10.0, Eigen::VectorXd::Ones(2));
  const ModelComparison same = compare_models(r, r);
  EXPECT_EQ(same.delta_l2, 0.0);
  EXPECT_EQ(same.bic, 0.0);

  LaplaceReport small = r;
  LaplaceReport large = r;
  small.n = large.n = 1000;
  small.k = 2;
  large.k = 5;
  small.l0 = 0.5;
  large.l0 = 0.498;
  const ModelComparison cmp = compare_models(large, small);
  EXPECT_EQ(cmp.delta_k, 3);
  EXPECT_NEAR(cmp.bic, 16.72326583694641, 1e-10);

  LaplaceReport other = r;
  other.n = 301;
  EXPECT_THROW(compare_models(r, other), ContractError);
}

TEST(Evidence, SignConventionPrefersLowerL2) {
  const LaplaceReport a = laplace_evidence(quadratic(Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Constant(1, 0.0)),
                                           100, 10.0, Eigen::VectorXd::Zero(1));
  LaplaceReport worse = a;
  worse.l0 += 0.1;
  worse.l1 += 0.1;
  worse.l2 += 0.1;
  const ModelComparison cmp = compare_models(worse, a);
  EXPECT_GT(cmp.delta_l2, 0.0);
  EXPECT_EQ(cmp.preferred, 2);
}

TEST(Evidence, EqualKDifferenceIsLambdaFree) {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd a = random_spd(gen, 3);
  const Eigen::MatrixXd b = random_spd(gen, 3);
  double first = 0.0;
  for (double lambda : {10.0, 100.0, 1000.0}) {
    const LaplaceReport ra = laplace_evidence(quadratic(a), 100, lambda * lambda, Eigen::VectorXd::Ones(3));
    const LaplaceReport rb = laplace_evidence(quadratic(b), 100, lambda * lambda, Eigen::VectorXd::Ones(3));
    const double d = compare_models(ra, rb).delta_l2;
    if (lambda == 10.0) first = d;
    EXPECT_NEAR(d, first, 1e-8);
  }
}

TEST(Evidence, QuadratureGaussian) {
  // L0 = 0, N = 1, lambda = 1: N L1 = w^2 / 2 and the integral is 1.
  const Objective zero(1, [](const Eigen::VectorXd&, Eigen::VectorXd* g) {
    if (g != nullptr) *g = Eigen::VectorXd::Zero(1);
    return 0.0;
  });
  EXPECT_NEAR(quadrature_evidence(zero, 1, 1.0).log_gamma, 0.0, 1e-8);
  // L0 = w^2: N L1 = 3 w^2 / 2, integral 1 / sqrt(3).
  EXPECT_NEAR(quadrature_evidence(quadratic(Eigen::MatrixXd::Constant(1, 1, 2.0)), 1, 1.0).log_gamma,
              -0.5 * std::log(3.0), 1e-8);
}

TEST(Evidence, QuadratureAgreesWithLaplaceOnQuadratics) {
  const Objective l0 = quadratic(Eigen::MatrixXd::Constant(1, 1, 3.0));
  const LaplaceReport r = laplace_evidence(l0, 100, 100.0, Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(quadrature_evidence(l0, 100, 100.0).log_gamma, -100.0 * r.l2, 1e-6);
  const Objective l2d = quadratic(Eigen::Matrix2d{{2.0, 0.3}, {0.3, 1.0}});
  const LaplaceReport r2 = laplace_evidence(l2d, 40, 2.0, Eigen::VectorXd::Zero(2));
  EXPECT_NEAR(quadrature_evidence(l2d, 40, 2.0).log_gamma, -40.0 * r2.l2, 1e-6);
}

TEST(Evidence, LaplaceGapShrinksWithN) {
  const Objective l0 = perturbed(1.0, 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100, 1000, 10000}) {
    const LaplaceReport r = laplace_evidence(l0, n, 1.0, Eigen::VectorXd::Constant(1, 0.3));
    const double gap = std::abs(quadrature_evidence(l0, n, 1.0).log_gamma + static_cast<double>(n) * r.l2);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}

TEST(Evidence, DoubleWellBreaksLaplace) {
  // Two symmetric minima: the integral carries both, Laplace only one.
  const Objective well(1, [](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
    const double x = w[0];
    if (g != nullptr) *g = Eigen::VectorXd::Constant(1, 0.5 * x * (x * x - 1.0));
    return (x * x - 1.0) * (x * x - 1.0) / 8.0;
  });
  const LaplaceReport r = laplace_evidence(well, 20, 100.0, Eigen::VectorXd::Constant(1, 0.9));
  const double gap = quadrature_evidence(well, 20, 100.0).log_gamma + 20.0 * r.l2;
  EXPECT_GT(gap, 0.5);
}

TEST(Evidence, QuadratureArgumentChecks) {
  EXPECT_THROW(quadrature_evidence(quadratic(Eigen::MatrixXd::Identity(4, 4)), 10, 1.0), ArgumentError);
  QuadratureOptions tiny;
  tiny.max_evaluations = 1000;
  EXPECT_THROW(quadrature_evidence(quadratic(Eigen::MatrixXd::Identity(2, 2)), 10, 1.0, tiny), NumericalError);
}
