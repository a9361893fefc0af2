#include <gtest/gtest.h>

#include <cmath>

#include "covgrad/errors.hpp"
#include "covgrad/oracles.hpp"
#include "covgrad/random.hpp"

using namespace covgrad;

TEST(Oracles, QuadraticExamples) {
  const OracleSpec spec{OracleKind::quadratic, 1.0, 1.0, 1.0};
  const OracleState s0 = quadratic_exact(spec, 0.0);
  EXPECT_EQ(s0.w, 1.0);
  EXPECT_EQ(s0.loss, 0.5);
  EXPECT_NEAR(quadratic_exact(spec, 1.0).w, 0.36787944117144233, 1e-15);
  const OracleSpec other{OracleKind::quadratic, -2.5, 0.7, 1.0};
  for (double t : {0.1, 1.0, 3.0}) {
    const OracleState s = quadratic_exact(other, t);
    EXPECT_NEAR(s.loss / quadratic_exact(other, 0.0).loss, (s.w / other.w0) * (s.w / other.w0), 1e-14);
  }
}

TEST(Oracles, QuarticExamples) {
  const OracleSpec spec{OracleKind::quartic, 1.0, 1.0, 1.0};
  const OracleState s0 = quartic_exact(spec, 0.0);
  EXPECT_EQ(s0.w, 1.0);
  EXPECT_EQ(s0.loss, 0.125);
  EXPECT_DOUBLE_EQ(quartic_exact(spec, 3.0).w, 0.5);
  // L ~ t^-2 for large t
  const double ratio = quartic_exact(spec, 2e6).loss / quartic_exact(spec, 1e6).loss;
  EXPECT_NEAR(ratio, 0.25, 1e-6);
}

TEST(Oracles, ClosedFormsSolveTheFlow) {
  for (OracleKind kind : {OracleKind::quadratic, OracleKind::quartic}) {
    const OracleSpec spec{kind, 1.3, 0.8, 2.0};
    for (double t = 0.0; t <= 5.0; t += 0.25) {
      const double h = 1e-5;
      const double dw = (exact(spec, t + h).w - exact(spec, t - h).w) / (2.0 * h);
      EXPECT_LE(std::abs(dw + spec.eta * spec.dloss(exact(spec, t).w)), 1e-8);
      EXPECT_NEAR(exact(spec, t).loss, spec.loss(exact(spec, t).w), 1e-14);
      EXPECT_LT(exact(spec, t + 0.25).loss, exact(spec, t).loss);
    }
  }
}

TEST(Oracles, QuarticIsSlower) {
  // Equal initial loss: W0 = 1 quadratic (L0 = 1/2) against alpha = 4, W0 = 1.
  const OracleSpec q{OracleKind::quadratic, 1.0, 1.0, 1.0};
  const OracleSpec p{OracleKind::quartic, 1.0, 1.0, 4.0};
  ASSERT_EQ(quadratic_exact(q, 0.0).loss, quartic_exact(p, 0.0).loss);
  // The quartic starts faster and is overtaken near t = 2.2.
  EXPECT_LT(quartic_exact(p, 1.0).loss, quadratic_exact(q, 1.0).loss);
  for (double t = 2.5; t <= 20.0; t += 0.5) EXPECT_GT(quartic_exact(p, t).loss, quadratic_exact(q, t).loss);
}

TEST(Oracles, SpecValidation) {
  EXPECT_THROW((quadratic_exact(OracleSpec{OracleKind::quadratic, 1.0, 0.0, 1.0}, 1.0)), ArgumentError);
  EXPECT_THROW((quartic_exact(OracleSpec{OracleKind::quartic, 1.0, 1.0, -1.0}, 1.0)), ArgumentError);
  EXPECT_THROW((quartic_exact(OracleSpec{OracleKind::quadratic, 1.0, 1.0, 1.0}, 1.0)), ContractError);
}

TEST(Oracles, CensusIndependentSigns) {
  const CensusResult one = saddle_census(1, 100000, CensusModel::independent_signs, 1);
  EXPECT_NEAR(one.fraction, 0.5, 4.0 * one.standard_error);
  const CensusResult three = saddle_census(3, 200000, CensusModel::independent_signs, 2);
  EXPECT_NEAR(three.fraction, 0.125, 4.0 * three.standard_error);
  EXPECT_NEAR(three.standard_error, std::sqrt(three.fraction * (1 - three.fraction) / 200000.0), 1e-15);
}

TEST(Oracles, CensusRandomSymmetricIsRarer) {
  const CensusResult r = saddle_census(8, 200000, CensusModel::random_symmetric, 3);
  EXPECT_LT(r.fraction, std::ldexp(1.0, -8));
  const CensusResult one = saddle_census(1, 10000, CensusModel::random_symmetric, 4);
  EXPECT_NEAR(one.fraction, 0.5, 4.0 * one.standard_error);
}

TEST(Oracles, CensusIsDeterministicAndChecksArguments) {
  const CensusResult a = saddle_census(4, 5000, CensusModel::random_symmetric, 9);
  const CensusResult b = saddle_census(4, 5000, CensusModel::random_symmetric, 9);
  EXPECT_EQ(a.minima, b.minima);
  EXPECT_THROW(saddle_census(3, 99, CensusModel::independent_signs, 0), ArgumentError);
  EXPECT_THROW(saddle_census(31, 1000, CensusModel::independent_signs, 0), ArgumentError);
  EXPECT_THROW(saddle_census(13, 1000, CensusModel::random_symmetric, 0), ArgumentError);
  EXPECT_THROW(saddle_census(0, 1000, CensusModel::independent_signs, 0), ArgumentError);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  auto a = make_stream(5, 0);
  auto b = make_stream(5, 0);
  auto c = make_stream(5, 1);
  auto d = make_stream(6, 0);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}
