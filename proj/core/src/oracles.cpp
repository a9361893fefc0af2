#include "covgrad/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "covgrad/errors.hpp"
#include "covgrad/random.hpp"

namespace covgrad {

void OracleSpec::validate() const {
  if (!(eta > 0.0)) throw ArgumentError("oracle eta must be positive");
  if (kind == OracleKind::quartic && !(alpha > 0.0)) throw ArgumentError("quartic oracle needs alpha > 0");
}

double OracleSpec::loss(double w) const {
  return kind == OracleKind::quadratic ? 0.5 * w * w : alpha / 8.0 * w * w * w * w;
}

double OracleSpec::dloss(double w) const {
  return kind == OracleKind::quadratic ? w : alpha / 2.0 * w * w * w;
}

OracleState quadratic_exact(const OracleSpec& spec, double t) {
  spec.validate();
  if (spec.kind != OracleKind::quadratic) throw ContractError("quadratic_exact called on a quartic spec");
  const double l0 = 0.5 * spec.w0 * spec.w0;
  return {spec.w0 * std::exp(-spec.eta * t), l0 * std::exp(-2.0 * spec.eta * t)};
}

OracleState quartic_exact(const OracleSpec& spec, double t) {
  spec.validate();
  if (spec.kind != OracleKind::quartic) throw ContractError("quartic_exact called on a quadratic spec");
  const double l0 = spec.alpha / 8.0 * std::pow(spec.w0, 4);
  const double stretch = 1.0 + spec.alpha * spec.eta * spec.w0 * spec.w0 * t;
  return {spec.w0 / std::sqrt(stretch), l0 / (stretch * stretch)};
}

OracleState exact(const OracleSpec& spec, double t) {
  return spec.kind == OracleKind::quadratic ? quadratic_exact(spec, t) : quartic_exact(spec, t);
}

std::string_view to_string(CensusModel model) {
  return model == CensusModel::independent_signs ? "independent-signs" : "random-symmetric";
}

CensusResult saddle_census(std::size_t dimension, std::size_t trials, CensusModel model, std::uint64_t seed) {
  if (trials < 100) throw ArgumentError("saddle_census needs at least 100 trials");
  const std::size_t max_dim = model == CensusModel::independent_signs ? 30 : 12;
  if (dimension < 1 || dimension > max_dim) {
    throw ArgumentError("saddle_census dimension must lie in [1, " + std::to_string(max_dim) + "]");
  }

  constexpr std::size_t kChunk = 1 << 16;
  const auto d = static_cast<Eigen::Index>(dimension);
  CensusResult r;
  r.trials = trials;
  Eigen::MatrixXd m(d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d);
  for (std::size_t start = 0, chunk = 0; start < trials; start += kChunk, ++chunk) {
    auto gen = make_stream(seed, chunk);
    const std::size_t count = std::min(kChunk, trials - start);
    for (std::size_t t = 0; t < count; ++t) {
      if (model == CensusModel::independent_signs) {
        // one random bit per direction; a minimum needs every curvature positive
        const std::uint64_t bits = gen();
        const std::uint64_t mask = dimension == 64 ? ~0ULL : ((1ULL << dimension) - 1);
        if ((bits & mask) == mask) ++r.minima;
        continue;
      }
      std::normal_distribution<double> normal;
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) m(i, j) = normal(gen);
      }
      m = (0.5 * (m + m.transpose())).eval();
      // A negative diagonal entry already rules out positive definiteness.
      if ((m.diagonal().array() <= 0.0).any()) continue;
      eig.compute(m, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() > 0.0) ++r.minima;
    }
  }
  r.fraction = static_cast<double>(r.minima) / static_cast<double>(trials);
  r.standard_error = std::sqrt(r.fraction * (1.0 - r.fraction) / static_cast<double>(trials));
  return r;
}

}  // namespace covgrad
