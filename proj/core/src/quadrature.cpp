#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "covgrad/errors.hpp"
#include "covgrad/evidence.hpp"

namespace covgrad {

namespace {

struct GridEstimate {
  double log_integral = 0.0;
  std::size_t evaluations = 0;
};

// log of the trapezoid sum of exp(-exponent) on a uniform tensor grid.
GridEstimate trapezoid_log(const std::function<double(const Eigen::VectorXd&)>& exponent, std::size_t k,
                           double lo, double hi, std::size_t points) {
  const double h = (hi - lo) / static_cast<double>(points - 1);
  std::size_t total = 1;
  for (std::size_t d = 0; d < k; ++d) total *= points;

  std::vector<double> e(total);
  std::vector<double> log_weight(total);
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  double e_min = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double lw = 0.0;
    for (std::size_t d = 0; d < k; ++d) {
      const std::size_t i = rest % points;
      rest /= points;
      w[static_cast<Eigen::Index>(d)] = lo + h * static_cast<double>(i);
      lw += std::log(i == 0 || i == points - 1 ? 0.5 * h : h);
    }
    const double v = exponent(w);
    if (std::isnan(v)) throw NumericalError("quadrature: integrand exponent is NaN");
    e[flat] = v;
    log_weight[flat] = lw;
    e_min = std::min(e_min, v);
  }
  if (!std::isfinite(e_min)) throw NumericalError("quadrature: integrand overflows on the whole grid");

  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    sum += std::exp(log_weight[flat] - (e[flat] - e_min));
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericalError("quadrature: shifted sum is not finite");
  return {std::log(sum) - e_min, total};
}

}  // namespace

QuadratureResult quadrature_evidence(const Objective& loss0, std::size_t n, double lambda_sq,
                                     const QuadratureOptions& options) {
  const std::size_t k = loss0.dimension();
  if (k < 1 || k > 3) throw ArgumentError("quadrature_evidence supports 1 to 3 parameters, got " + std::to_string(k));
  if (n == 0) throw ArgumentError("quadrature_evidence needs N >= 1");
  if (!(lambda_sq > 0.0)) throw ArgumentError("lambda^2 must be positive");

  const double nd = static_cast<double>(n);
  const double lambda = std::sqrt(lambda_sq);
  const double half = options.half_width * lambda;
  // N L1(W) = N L0(W) + |W|^2 / (2 lambda^2)
  auto exponent = [&](const Eigen::VectorXd& w) { return nd * loss0.value(w) + w.squaredNorm() / (2.0 * lambda_sq); };

  const std::size_t defaults[] = {401, 201, 101};
  std::size_t points = options.min_points != 0 ? options.min_points : defaults[k - 1];
  if (points < 3) points = 3;

  // sqrt(g) (2 pi)^(-k/2) with sqrt(g) = lambda^-k
  const double log_prefactor = -static_cast<double>(k) * (std::log(lambda) + 0.5 * std::log(2.0 * std::numbers::pi));

  QuadratureResult result;
  GridEstimate previous = trapezoid_log(exponent, k, -half, half, points);
  result.evaluations = previous.evaluations;
  for (;;) {
    const std::size_t finer = 2 * points - 1;
    std::size_t cost = 1;
    for (std::size_t d = 0; d < k; ++d) cost *= finer;
    if (result.evaluations + cost > options.max_evaluations) {
      throw NumericalError("quadrature: no agreement to " + std::to_string(options.tolerance) + " within " +
                           std::to_string(options.max_evaluations) + " evaluations");
    }
    const GridEstimate next = trapezoid_log(exponent, k, -half, half, finer);
    result.evaluations += next.evaluations;
    points = finer;
    const double change = std::abs(next.log_integral - previous.log_integral);
    previous = next;
    if (change <= options.tolerance) {
      result.last_change = change;
      break;
    }
  }
  result.log_gamma = previous.log_integral + log_prefactor;
  result.points_per_axis = points;
  return result;
}

}  // namespace covgrad
