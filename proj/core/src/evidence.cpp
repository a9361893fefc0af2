#include "covgrad/evidence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "covgrad/errors.hpp"
#include "covgrad/metric.hpp"
#include "covgrad/optimizers.hpp"
#include "covgrad/trajectory.hpp"

namespace covgrad {

namespace {

void check_prior(std::size_t n, double lambda_sq) {
  if (n == 0) throw ArgumentError("evidence needs N >= 1");
  if (!(lambda_sq > 0.0) || !std::isfinite(lambda_sq)) throw ArgumentError("lambda^2 must be positive");
}

double prior_term(std::size_t n, double lambda_sq) { return 1.0 / (static_cast<double>(n) * lambda_sq); }

// Flat parameter vector viewed as a single bias-free column layer, so the
// damped stepper can drive it.
NetworkSpec as_network(const Eigen::VectorXd& w) {
  NetworkSpec net;
  net.layers.push_back({w.cast<Scalar>(), Vector(), Activation::identity});
  return net;
}

// Damped descent until the Hessian is positive definite again (or the
// budget is spent). Returns the number of steps taken.
std::size_t damped_escape(const Objective& l1, Eigen::VectorXd& w, std::size_t budget) {
  Hyperparameters hyper;
  hyper.dt = 0.05;
  hyper.mass = 1.0;
  hyper.friction = 1.0;
  hyper.beta = 1.0;
  NetworkSpec net = as_network(w);
  OptimizerState state = OptimizerState::for_network(net, hyper);
  const LayerMetric metric = LayerMetric::unit(1);
  std::size_t taken = 0;
  for (; taken < budget; ++taken) {
    Gradient g;
    g.mode = Mode::real;
    g.layers.push_back({l1.gradient(net.layers[0].weight.real()).cast<Scalar>(), Vector()});
    step_damped(net, metric, g, state);
  }
  w = net.layers[0].weight.col(0).real();
  return taken;
}

}  // namespace

HessianMatrix hessian(const Objective& loss0, const Eigen::VectorXd& w, std::size_t n, double lambda_sq) {
  check_prior(n, lambda_sq);
  if (loss0.dimension() > kMaxDenseParameters) {
    throw ArgumentError("hessian: " + std::to_string(loss0.dimension()) + " parameters exceed the dense bound");
  }
  HessianMatrix h{finite_difference_hessian(loss0, w)};
  for (Eigen::Index i = 0; i < h.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.values.cols(); ++j) {
      if (!std::isfinite(h.values(i, j))) {
        throw NumericalError("hessian: entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
      }
    }
  }
  h.values.diagonal().array() += prior_term(n, lambda_sq);
  return h;
}

Objective regularized_objective(const Objective& loss0, std::size_t n, double lambda_sq) {
  check_prior(n, lambda_sq);
  const double c = 1.0 / (2.0 * static_cast<double>(n) * lambda_sq);
  return Objective(loss0.dimension(), [loss0, c](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    if (grad == nullptr) return loss0.value(w) + c * w.squaredNorm();
    const double v = loss0.value_and_gradient(w, *grad);
    *grad += 2.0 * c * w;
    return v + c * w.squaredNorm();
  });
}

Eigen::VectorXd minimize_l1(const Objective& loss0, std::size_t n, double lambda_sq, const Eigen::VectorXd& init,
                            const MinimizeOptions& options) {
  const Objective l1 = regularized_objective(loss0, n, lambda_sq);
  Eigen::VectorXd w = init;
  if (static_cast<std::size_t>(w.size()) != l1.dimension()) throw ShapeError("minimize_l1: init has the wrong size");
  if (w.size() == 0) return w;

  double grad_norm = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd g;
    const double f = l1.value_and_gradient(w, g);
    grad_norm = g.norm();
    if (!std::isfinite(f) || !std::isfinite(grad_norm)) {
      throw ConvergenceError("minimize_l1: objective left the finite range", grad_norm);
    }
    if (grad_norm <= options.gradient_tolerance) return w;

    Eigen::VectorXd trial = w;
    CogradientStep step;
    try {
      step = step_cogradient(trial, l1, 1.0);
    } catch (const SingularHessianError&) {
      damped_escape(l1, w, 50);
      continue;
    }
    if (step.indefinite) {
      damped_escape(l1, w, 50);
      continue;
    }
    // Newton steps are exact on quadratics; elsewhere halve until the loss
    // or the gradient improves.
    double t = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      Eigen::VectorXd g_trial;
      const double f_trial = l1.value_and_gradient(trial, g_trial);
      if (std::isfinite(f_trial) && (f_trial < f || g_trial.norm() < grad_norm)) {
        accepted = true;
        break;
      }
      t *= 0.5;
      trial = w + t * step.delta;
    }
    if (!accepted) {
      // The Newton step no longer changes anything representable: we sit at
      // the rounding floor of the gradient.
      if (step.delta.norm() <= 1e-14 * (1.0 + w.norm())) return w;
      throw ConvergenceError("minimize_l1: line search failed", grad_norm);
    }
    w = trial;
  }
  throw ConvergenceError("minimize_l1: no convergence within " + std::to_string(options.max_iterations) +
                             " iterations (gradient norm " + std::to_string(grad_norm) + ")",
                         grad_norm);
}

LaplaceReport laplace_evidence(const Objective& loss0, std::size_t n, double lambda_sq, const Eigen::VectorXd& init,
                               const MinimizeOptions& options) {
  check_prior(n, lambda_sq);
  LaplaceReport r;
  r.k = loss0.dimension();
  r.n = n;
  r.lambda_sq = lambda_sq;
  const double nd = static_cast<double>(n);
  if (r.k == 0) {
    r.w1 = Eigen::VectorXd();
    r.l0 = r.l1 = r.l2 = loss0.value(r.w1);
    return r;
  }

  r.w1 = minimize_l1(loss0, n, lambda_sq, init, options);
  r.l0 = loss0.value(r.w1);
  r.l1 = r.l0 + r.w1.squaredNorm() / (2.0 * nd * lambda_sq);

  const HessianMatrix h = hessian(loss0, r.w1, n, lambda_sq);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h.values, Eigen::EigenvaluesOnly);
  r.hessian_eigenvalues = eig.eigenvalues();
  const double floor = 1e-10 * h.values.trace() / static_cast<double>(r.k);
  const double lo = r.hessian_eigenvalues.minCoeff();
  const double hi = r.hessian_eigenvalues.maxCoeff();
  if (!(lo > floor) || !(floor >= 0.0)) {
    throw SaddleError("laplace_evidence: Hessian at the extremum is not positive definite (eigenvalues in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "])",
                      lo, hi);
  }
  const Eigen::LLT<Eigen::MatrixXd> chol(h.values);
  r.log_sqrt_h = chol.matrixLLT().diagonal().array().log().sum();

  const Eigen::MatrixXd fisher =
      h.values - Eigen::MatrixXd::Identity(h.values.rows(), h.values.cols()) * prior_term(n, lambda_sq);
  const Eigen::LLT<Eigen::MatrixXd> fchol(fisher);
  r.log_sqrt_fisher = fchol.info() == Eigen::Success ? fchol.matrixLLT().diagonal().array().log().sum()
                                                      : std::numeric_limits<double>::quiet_NaN();

  r.log_sqrt_g = -0.5 * static_cast<double>(r.k) * std::log(lambda_sq);
  r.l2 = r.l1 + 0.5 * static_cast<double>(r.k) * std::log(nd) / nd + (r.log_sqrt_h - r.log_sqrt_g) / nd;
  return r;
}

ModelComparison compare_models(const LaplaceReport& model1, const LaplaceReport& model2) {
  if (model1.n != model2.n) {
    throw ContractError("compare_models: reports use N = " + std::to_string(model1.n) + " and N = " +
                        std::to_string(model2.n));
  }
  if (model1.lambda_sq != model2.lambda_sq) throw ContractError("compare_models: reports use different lambda^2");
  ModelComparison c;
  c.n = model1.n;
  const double nd = static_cast<double>(c.n);
  const double log_n = std::log(nd);
  c.delta_l0 = model1.l0 - model2.l0;
  c.delta_k = static_cast<long>(model1.k) - static_cast<long>(model2.k);

  auto fisher = [&c](const LaplaceReport& r) {
    if (r.k == 0) return 0.0;
    if (std::isfinite(r.log_sqrt_fisher)) return r.log_sqrt_fisher;
    c.fisher_fallback = true;
    return r.log_sqrt_h;
  };
  c.delta_log_sqrt_h = fisher(model1) - fisher(model2);
  const double dk = static_cast<double>(c.delta_k);
  c.delta_l2 = c.delta_l0 + 0.5 * dk * log_n / nd + c.delta_log_sqrt_h / nd;
  c.bic = 2.0 * nd * c.delta_l0 + dk * log_n;
  c.delta_l2_regularized = model1.l2 - model2.l2;
  c.lambda_residual = c.delta_l2_regularized - c.delta_l2;
  if (c.delta_l2 > 0.0) {
    c.preferred = 2;
  } else if (c.delta_l2 < 0.0) {
    c.preferred = 1;
  } else {
    c.preferred = model2.k < model1.k ? 2 : 1;
  }
  return c;
}

void LaplaceReport::write(std::ostream& out) const {
  out << "k = " << k << '\n'
      << "N = " << n << '\n'
      << "lambda_sq = " << format_double(lambda_sq) << '\n'
      << "L0 = " << format_double(l0) << '\n'
      << "L1 = " << format_double(l1) << '\n'
      << "log_sqrt_h = " << format_double(log_sqrt_h) << '\n'
      << "log_sqrt_g = " << format_double(log_sqrt_g) << '\n'
      << "log_sqrt_fisher = " << format_double(log_sqrt_fisher) << '\n'
      << "L2 = " << format_double(l2) << '\n';
  for (Eigen::Index i = 0; i < w1.size(); ++i) out << "W1[" << i << "] = " << format_double(w1[i]) << '\n';
}

void LaplaceReport::write_csv_header(std::ostream& out) {
  out << "k,N,lambda_sq,L0,L1,log_sqrt_h,log_sqrt_g,L2\n";
}

void LaplaceReport::write_csv_row(std::ostream& out) const {
  out << k << ',' << n << ',' << format_double(lambda_sq) << ',' << format_double(l0) << ',' << format_double(l1)
      << ',' << format_double(log_sqrt_h) << ',' << format_double(log_sqrt_g) << ',' << format_double(l2) << '\n';
}

void ModelComparison::write(std::ostream& out) const {
  out << "N = " << n << '\n'
      << "delta_L0 = " << format_double(delta_l0) << '\n'
      << "delta_k = " << delta_k << '\n'
      << "delta_log_sqrt_h = " << format_double(delta_log_sqrt_h) << '\n'
      << "delta_L2 = " << format_double(delta_l2) << '\n'
      << "BIC = " << format_double(bic) << '\n'
      << "delta_L2_regularized = " << format_double(delta_l2_regularized) << '\n'
      << "lambda_residual = " << format_double(lambda_residual) << '\n'
      << "fisher_fallback = " << (fisher_fallback ? "true" : "false") << '\n';
}

void ModelComparison::write_csv_header(std::ostream& out) {
  out << "N,delta_L0,delta_k,delta_log_sqrt_h,delta_L2,BIC,preferred\n";
}

void ModelComparison::write_csv_row(std::ostream& out) const {
  out << n << ',' << format_double(delta_l0) << ',' << delta_k << ',' << format_double(delta_log_sqrt_h) << ','
      << format_double(delta_l2) << ',' << format_double(bic) << ',' << preferred << '\n';
}

}  // namespace covgrad
