#include "covgrad/harness/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "covgrad/errors.hpp"
#include "covgrad/evidence.hpp"
#include "covgrad/harness/config.hpp"
#include "covgrad/harness/experiment.hpp"
#include "covgrad/oracles.hpp"
#include "covgrad/trajectory.hpp"

namespace covgrad::harness {

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.out != nullptr ? *ctx.out : std::cout; }
std::ostream& err_of(const CommandContext& ctx) { return ctx.err != nullptr ? *ctx.err : std::cerr; }

/// Discards output under --quiet.
class Printer {
 public:
  explicit Printer(const CommandContext& ctx) : quiet_(ctx.quiet), out_(out_of(ctx)) {}

  template <class T>
  Printer& operator<<(const T& v) {
    if (!quiet_) out_ << v;
    return *this;
  }

 private:
  bool quiet_;
  std::ostream& out_;
};

ExperimentConfig load(const CommandContext& ctx, std::size_t index) {
  if (ctx.configs.size() <= index) throw ConfigError("--config: missing config file");
  ExperimentConfig c = load_config(ctx.configs[index]);
  if (ctx.seed) c.seed = *ctx.seed;
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw ConfigError("--out: cannot write " + path.string());
}

std::filesystem::path prepare_out(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("--out: cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

int guarded(const CommandContext& ctx, const std::function<int()>& body) {
  std::ostream& err = err_of(ctx);
  try {
    return body();
  } catch (const SaddleError& e) {
    err << "error: " << e.what() << "\nmin_eigenvalue = " << format_double(e.min_eigenvalue())
        << "\nmax_eigenvalue = " << format_double(e.max_eigenvalue()) << '\n';
    return kExitSaddle;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSaddle;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

double movement(const NetworkSpec& a, const NetworkSpec& b, std::size_t layer) {
  const Layer& x = a.layers[layer];
  const Layer& y = b.layers[layer];
  return std::sqrt((x.weight - y.weight).squaredNorm() + (x.bias - y.bias).squaredNorm());
}

void require_real(const ExperimentConfig& c, const char* what) {
  if (c.model.mode != Mode::real) throw ConfigError(std::string("model.mode: ") + what + " needs a real model");
}

}  // namespace

int cmd_train(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    const ExperimentConfig c = load(ctx, 0);
    if (c.model.kind == ModelKind::constant) throw ConfigError("model.kind: a constant model has nothing to train");
    Model model = build_model(c);
    const LayerMetric metric = c.layer_metric(model.net.layers.size());
    const std::filesystem::path dir = prepare_out(ctx.out_dir.value_or("."));

    const NetworkSpec start = model.net;
    TrajectoryOptions options;
    options.optimizer = c.optimizer;
    options.hyper = c.hyper;
    options.steps = c.steps;
    options.record_every = c.record_every;
    const auto t0 = std::chrono::steady_clock::now();
    const TrajectoryRecord record = run_trajectory(model.net, model.loss, metric, options);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    record.write_csv(csv);
    write_file(dir / c.trajectory_file, csv.str());

    std::ostringstream summary;
    summary << "optimizer = " << to_string(c.optimizer) << '\n'
            << "status = " << (record.diverged() ? "diverged" : "converged") << '\n'
            << "steps = " << record.steps_taken << '\n'
            << "initial_loss = " << format_double(record.rows.front().loss) << '\n'
            << "final_loss = " << format_double(record.rows.back().loss) << '\n'
            << "final_param_norm = " << format_double(record.rows.back().param_norm) << '\n'
            << "path_length = " << format_double(record.rows.back().path_length) << '\n';
    for (std::size_t l = 0; l < start.layers.size(); ++l) {
      summary << "layer" << l << ".frozen = " << (metric[l].is_frozen() ? "true" : "false") << '\n'
              << "layer" << l << ".movement = " << format_double(movement(start, model.net, l)) << '\n';
    }
    if (record.diverged()) {
      summary << "diverged_at = " << *record.diverged_at << '\n'
              << "divergence = " << record.divergence_message << '\n';
    }
    summary << "wall_time_s = " << wall << '\n';
    write_file(dir / "summary.txt", summary.str());

    Printer(ctx) << summary.str();
    if (record.diverged()) {
      err_of(ctx) << "error: diverged: " << record.divergence_message << '\n';
      return static_cast<int>(kExitDivergence);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_evidence(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    const ExperimentConfig c = load(ctx, 0);
    require_real(c, "evidence");
    if (!c.lambda_sq) throw ConfigError("reg.lambda_sq: required by evidence");
    const Model model = build_model(c);
    const std::size_t k = model.parameter_count();
    if (k > kMaxDenseParameters) {
      throw ConfigError("model: " + std::to_string(k) + " parameters exceed the dense Hessian bound of " +
                        std::to_string(kMaxDenseParameters));
    }
    if (c.quadrature && (k < 1 || k > 3)) throw ConfigError("evidence.quadrature: needs 1 to 3 parameters");
    const Objective objective = model.objective();
    const LaplaceReport report = laplace_evidence(objective, c.data.n, *c.lambda_sq, model.initial_point());

    std::ostringstream text;
    report.write(text);
    if (c.quadrature) {
      const QuadratureResult q = quadrature_evidence(objective, c.data.n, *c.lambda_sq);
      const double laplace = -static_cast<double>(c.data.n) * report.l2;
      text << "log_gamma_quadrature = " << format_double(q.log_gamma) << '\n'
           << "log_gamma_laplace = " << format_double(laplace) << '\n'
           << "log_gamma_gap = " << format_double(std::abs(q.log_gamma - laplace)) << '\n'
           << "quadrature_points = " << q.points_per_axis << '\n';
    }
    if (ctx.out_dir) {
      const auto dir = prepare_out(*ctx.out_dir);
      write_file(dir / "evidence.txt", text.str());
      std::ostringstream csv;
      LaplaceReport::write_csv_header(csv);
      report.write_csv_row(csv);
      write_file(dir / "evidence.csv", csv.str());
    }
    Printer(ctx) << text.str();
    return static_cast<int>(kExitOk);
  });
}

namespace {

void require_shared_data(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.data.n != b.data.n) {
    throw ConfigError("data.n: configs use N = " + std::to_string(a.data.n) + " and N = " + std::to_string(b.data.n));
  }
  if (a.data_seed() != b.data_seed()) throw ConfigError("data.seed: configs use different dataset seeds");
  if (a.data.kind != b.data.kind) throw ConfigError("data.kind: configs use different generators");
  if (a.data.classes != b.data.classes || a.data.noise != b.data.noise || a.data.slope != b.data.slope ||
      a.data.intercept != b.data.intercept) {
    throw ConfigError("data: configs use different generator parameters");
  }
  if (a.lambda_sq != b.lambda_sq) throw ConfigError("reg.lambda_sq: configs use different priors");
}

}  // namespace

int cmd_compare(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    if (ctx.configs.size() != 2) throw ConfigError("--config: compare needs exactly two config files");
    const ExperimentConfig a = load(ctx, 0);
    const ExperimentConfig b = load(ctx, 1);
    require_real(a, "compare");
    require_real(b, "compare");
    if (!a.lambda_sq) throw ConfigError("reg.lambda_sq: required by compare");
    require_shared_data(a, b);
    const Model ma = build_model(a);
    const Model mb = build_model(b);
    if (ma.data && mb.data && ma.data->features != mb.data->features) {
      throw ConfigError("data.features: configs generate different feature counts");
    }
    const LaplaceReport ra = laplace_evidence(ma.objective(), a.data.n, *a.lambda_sq, ma.initial_point());
    const LaplaceReport rb = laplace_evidence(mb.objective(), b.data.n, *b.lambda_sq, mb.initial_point());
    const ModelComparison cmp = compare_models(ra, rb);

    std::ostringstream text;
    text << "model1.k = " << ra.k << "\nmodel1.L2 = " << format_double(ra.l2) << '\n'
         << "model2.k = " << rb.k << "\nmodel2.L2 = " << format_double(rb.l2) << '\n';
    cmp.write(text);
    text << "preferred = model" << cmp.preferred << " (" << ctx.configs[cmp.preferred == 1 ? 0 : 1].string()
         << ")\n";
    if (ctx.out_dir) {
      const auto dir = prepare_out(*ctx.out_dir);
      write_file(dir / "compare.txt", text.str());
      std::ostringstream csv;
      ModelComparison::write_csv_header(csv);
      cmp.write_csv_row(csv);
      write_file(dir / "compare.csv", csv.str());
    }
    Printer(ctx) << text.str();
    return static_cast<int>(kExitOk);
  });
}

int cmd_compare_study(const CommandContext& ctx, const std::vector<std::size_t>& ns, std::size_t seeds) {
  return guarded(ctx, [&] {
    if (ctx.configs.size() != 2) throw ConfigError("--config: compare needs exactly two config files");
    if (ns.empty() || seeds == 0) throw ConfigError("--study-n/--study-seeds: need at least one N and one seed");
    const ExperimentConfig a = load(ctx, 0);
    const ExperimentConfig b = load(ctx, 1);
    require_real(a, "compare");
    require_real(b, "compare");
    require_shared_data(a, b);
    const std::vector<SelectionRow> rows = selection_study(a, b, ns, seeds);
    std::ostringstream csv;
    csv << "N,seeds,model1_rate,model1_preferred,bic_model1_preferred,failures\n";
    for (const SelectionRow& r : rows) {
      csv << r.n << ',' << r.seeds << ',' << format_double(r.rate()) << ',' << r.first_preferred << ','
          << r.bic_first_preferred << ',' << r.failures << '\n';
    }
    if (ctx.out_dir) write_file(prepare_out(*ctx.out_dir) / "selection.csv", csv.str());
    Printer(ctx) << csv.str();
    return static_cast<int>(kExitOk);
  });
}

int cmd_gradcheck(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    const ExperimentConfig c = load(ctx, 0);
    if (c.model.kind == ModelKind::constant) throw ConfigError("model.kind: a constant model has no gradient");
    const Model model = build_model(c);
    bool relu = false;
    for (const Layer& l : model.net.layers) relu |= l.activation == Activation::relu;
    const GradcheckResult r = gradient_check(model.net, model.loss, model.value(), c.gradcheck_h, relu);
    const bool pass = r.max_error <= 1e-6;
    std::ostringstream text;
    text << "coordinates = " << r.coordinates << '\n'
         << "kink_exempt = " << r.exempt << '\n'
         << "max_relative_error = " << format_double(r.max_error) << '\n'
         << "worst = " << (r.worst.empty() ? "none" : r.worst) << '\n'
         << "worst_autodiff = " << format_double(r.worst_autodiff) << '\n'
         << "worst_finite_difference = " << format_double(r.worst_numeric) << '\n'
         << "status = " << (pass ? "pass" : "fail") << '\n';
    if (ctx.out_dir) write_file(prepare_out(*ctx.out_dir) / "gradcheck.txt", text.str());
    Printer(ctx) << text.str();
    if (!pass) {
      err_of(ctx) << "error: gradient check failed at " << r.worst << '\n';
      return static_cast<int>(kExitCheckFailed);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_oracle_check(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    const ExperimentConfig c = load(ctx, 0);
    require_real(c, "oracle-check");
    OracleSpec spec;
    if (c.model.kind == ModelKind::quadratic) {
      if (c.model.curvature != 1.0 || c.model.alpha != 0.0) {
        throw ConfigError("model: the quadratic oracle needs curvature 1 and alpha 0");
      }
      spec.kind = OracleKind::quadratic;
    } else if (c.model.kind == ModelKind::quartic) {
      if (c.model.curvature != 0.0) throw ConfigError("model.curvature: the quartic oracle needs curvature 0");
      spec.kind = OracleKind::quartic;
      spec.alpha = c.model.alpha;
    } else {
      throw ConfigError("model.kind: oracle-check needs a quadratic or quartic model");
    }
    if (c.model.center != 0.0) throw ConfigError("model.center: oracles are centered at zero");
    if (c.model.init.empty()) throw ConfigError("model.init: oracle-check needs an explicit initial value");
    if (c.optimizer != OptimizerKind::aristotle) throw ConfigError("opt: oracle-check follows the aristotle flow");
    if (c.lambda_sq) throw ConfigError("reg.lambda_sq: oracles are unregularized");
    spec.w0 = c.model.init.front();
    spec.eta = c.hyper.eta;
    spec.validate();

    Model model = build_model(c);
    TrajectoryOptions options;
    options.hyper = c.hyper;
    options.steps = c.steps;
    options.record_every = c.record_every;
    const TrajectoryRecord record =
        run_trajectory(model.net, model.loss, c.layer_metric(1), options);
    double w_err = 0.0;
    double l_err = 0.0;
    for (const TrajectoryRow& row : record.rows) {
      const OracleState exact = covgrad::exact(spec, row.t);
      w_err = std::max(w_err, std::abs(row.param_norm - std::abs(exact.w)) / std::abs(exact.w));
      l_err = std::max(l_err, std::abs(row.loss - exact.loss) / exact.loss);
    }
    const TrajectoryRow& last = record.rows.back();
    const OracleState final_exact = covgrad::exact(spec, last.t);
    const bool pass = !record.diverged() && w_err <= c.oracle_tolerance && l_err <= c.oracle_tolerance;

    std::ostringstream text;
    text << "oracle = " << (spec.kind == OracleKind::quadratic ? "quadratic" : "quartic") << '\n'
         << "t_end = " << format_double(last.t) << '\n'
         << "W_final = " << format_double(model.net.layers[0].weight(0, 0).real()) << '\n'
         << "W_exact = " << format_double(final_exact.w) << '\n'
         << "max_relative_error_W = " << format_double(w_err) << '\n'
         << "max_relative_error_L = " << format_double(l_err) << '\n'
         << "status = " << (pass ? "pass" : "fail") << '\n';
    if (ctx.out_dir) {
      const auto dir = prepare_out(*ctx.out_dir);
      std::ostringstream csv;
      record.write_csv(csv);
      write_file(dir / c.trajectory_file, csv.str());
      write_file(dir / "oracle.txt", text.str());
    }
    Printer(ctx) << text.str();
    return static_cast<int>(pass ? kExitOk : kExitCheckFailed);
  });
}

int cmd_saddle_census(const CommandContext& ctx) {
  return guarded(ctx, [&] {
    const ExperimentConfig c = load(ctx, 0);
    CensusResult r;
    try {
      r = saddle_census(c.census.dimension, c.census.trials, c.census.model, c.seed);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("census: ") + e.what());
    }
    const double expected = std::ldexp(1.0, -static_cast<int>(c.census.dimension));
    std::ostringstream text;
    text << "model = " << to_string(c.census.model) << '\n'
         << "dimension = " << c.census.dimension << '\n'
         << "trials = " << r.trials << '\n'
         << "minima = " << r.minima << '\n'
         << "fraction = " << format_double(r.fraction) << '\n'
         << "standard_error = " << format_double(r.standard_error) << '\n'
         << "independent_signs_expectation = " << format_double(expected) << '\n';
    if (ctx.out_dir) write_file(prepare_out(*ctx.out_dir) / "census.txt", text.str());
    Printer(ctx) << text.str();
    return static_cast<int>(kExitOk);
  });
}

}  // namespace covgrad::harness
