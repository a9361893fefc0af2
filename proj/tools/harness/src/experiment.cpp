#include "covgrad/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "covgrad/errors.hpp"
#include "covgrad/evidence.hpp"
#include "covgrad/random.hpp"
#include "covgrad/tape.hpp"

namespace covgrad::harness {

namespace {

constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kLabelStream = 2;
constexpr std::uint64_t kCenterStream = 3;
constexpr std::uint64_t kInitStream = 100;

Scalar draw(std::normal_distribution<double>& normal, std::mt19937_64& gen, Mode mode) {
  if (mode == Mode::real) return {normal(gen), 0.0};
  const double re = normal(gen);
  return {re * M_SQRT1_2, normal(gen) * M_SQRT1_2};
}

std::size_t input_width(const ExperimentConfig& c) {
  return c.model.kind == ModelKind::network ? c.model.widths.front() : 0;
}

std::size_t output_width(const ExperimentConfig& c) {
  return c.model.kind == ModelKind::network ? c.model.widths.back() : 0;
}

NetworkSpec initial_network(const ExperimentConfig& c) {
  const ModelConfig& m = c.model;
  NetworkSpec net;
  net.mode = m.mode;
  if (m.kind == ModelKind::constant) return net;
  if (m.kind != ModelKind::network) {
    net.layers.push_back({Matrix::Zero(1, 1), Vector(), Activation::identity});
  } else {
    for (std::size_t i = 0; i + 1 < m.widths.size(); ++i) {
      Layer l;
      l.weight = Matrix::Zero(static_cast<Eigen::Index>(m.widths[i + 1]), static_cast<Eigen::Index>(m.widths[i]));
      if (m.bias) l.bias = Vector::Zero(static_cast<Eigen::Index>(m.widths[i + 1]));
      l.activation = m.activations.size() == 1 ? m.activations.front() : m.activations[i];
      net.layers.push_back(std::move(l));
    }
  }

  std::vector<Scalar*> slots;
  for (Layer& l : net.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) slots.push_back(l.weight.data() + i);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) slots.push_back(l.bias.data() + i);
  }
  if (!m.init.empty()) {
    if (m.init.size() != slots.size()) {
      throw ConfigError("model.init: expected " + std::to_string(slots.size()) + " values, got " +
                        std::to_string(m.init.size()));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      *slots[i] = {m.init[i], m.init_imag.empty() ? 0.0 : m.init_imag[i]};
    }
  } else {
    auto gen = make_stream(c.seed, kInitStream);
    std::normal_distribution<double> normal;
    for (Scalar* s : slots) *s = m.init_scale * draw(normal, gen, m.mode);
  }
  net.validate();
  return net;
}

LossAndGradient scalar_loss(const ModelConfig& m, const std::optional<RegularizerConfig>& reg,
                            const NetworkSpec& net) {
  Tape tape(net.mode);
  const NodeId w = tape.variable(net.layers.at(0).weight, ParamTag{0, false});
  NodeId loss = 0;
  if (m.kind == ModelKind::double_well) {
    const NodeId r = tape.sub(tape.mul(w, w), tape.constant(Matrix::Constant(1, 1, m.center * m.center)));
    loss = tape.scale(tape.mul(r, tape.conj(r)), m.alpha / 8.0);
  } else {
    const NodeId d = tape.sub(w, tape.constant(Matrix::Constant(1, 1, m.center)));
    const NodeId q = tape.mul(d, tape.conj(d));
    loss = tape.add(tape.scale(q, m.curvature / 2.0), tape.scale(tape.mul(q, q), m.alpha / 8.0));
  }
  if (reg) loss = tape.add(loss, attach_regularizer(tape, {w}, *reg));
  tape.set_output(loss);
  return {tape.loss(), pullback(tape)};
}

}  // namespace

std::vector<double> SyntheticDataset::class_frequencies() const {
  std::vector<double> out;
  const double n = static_cast<double>(batch.size());
  for (std::size_t c : class_counts) out.push_back(static_cast<double>(c) / n);
  return out;
}

SyntheticDataset make_dataset(const DataConfig& data, std::uint64_t seed, std::size_t input_width,
                              std::size_t output_width, Mode mode) {
  if (data.kind == DataKind::none) throw ConfigError("data.kind: no generator selected");
  SyntheticDataset ds;
  ds.features = data.features == 0 ? input_width : data.features;
  const auto f = static_cast<Eigen::Index>(ds.features);
  const auto n = static_cast<Eigen::Index>(data.n);
  auto inputs_gen = make_stream(seed, kInputStream);
  auto labels_gen = make_stream(seed, kLabelStream);
  std::normal_distribution<double> normal;

  if (data.kind == DataKind::regression) {
    ds.batch.inputs.resize(f, n);
    Matrix targets(static_cast<Eigen::Index>(output_width), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < f; ++i) ds.batch.inputs(i, j) = draw(normal, inputs_gen, mode);
      const Scalar mean = ds.batch.inputs.col(j).mean();
      for (Eigen::Index r = 0; r < targets.rows(); ++r) {
        targets(r, j) = data.slope * mean + data.intercept + data.noise * draw(normal, labels_gen, mode);
      }
    }
    ds.batch.targets = std::move(targets);
    return ds;
  }

  if (mode != Mode::real) throw ConfigError("data.kind: class labels need a real model");
  const bool binary = output_width == 1 && data.classes == 2;
  if (!binary && output_width != data.classes) {
    throw ConfigError("data.classes: " + std::to_string(data.classes) + " classes do not fit " +
                      std::to_string(output_width) + " outputs");
  }
  ds.batch.inputs.resize(f, n);
  ClassLabels labels(static_cast<std::size_t>(n));
  if (data.kind == DataKind::logistic) {
    std::uniform_real_distribution<double> uniform;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < f; ++i) ds.batch.inputs(i, j) = normal(inputs_gen);
      const double logit = data.slope * ds.batch.inputs(0, j).real() + data.intercept;
      const double p = 1.0 / (1.0 + std::exp(-logit));
      labels[static_cast<std::size_t>(j)] = uniform(labels_gen) < p ? 1 : 0;
    }
  } else {
    auto centers_gen = make_stream(seed, kCenterStream);
    Eigen::MatrixXd centers(f, static_cast<Eigen::Index>(data.classes));
    for (Eigen::Index j = 0; j < centers.cols(); ++j) {
      for (Eigen::Index i = 0; i < f; ++i) centers(i, j) = data.slope * normal(centers_gen);
    }
    std::uniform_int_distribution<std::size_t> pick(0, data.classes - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t a = pick(labels_gen);
      labels[static_cast<std::size_t>(j)] = a;
      for (Eigen::Index i = 0; i < f; ++i) {
        ds.batch.inputs(i, j) = centers(i, static_cast<Eigen::Index>(a)) + data.noise * normal(inputs_gen);
      }
    }
  }
  ds.batch.targets = labels;
  ds.class_counts = ds.batch.class_counts(data.classes);
  return ds;
}

NetworkLoss Model::value() const {
  return [loss = loss](const NetworkSpec& net) { return loss(net).loss; };
}

Objective Model::objective() const {
  if (constant) {
    return Objective(0, [v = *constant](const Eigen::VectorXd&, Eigen::VectorXd* g) {
      if (g != nullptr) g->resize(0);
      return v;
    });
  }
  return network_objective(net, data_loss);
}

Eigen::VectorXd Model::initial_point() const { return constant ? Eigen::VectorXd() : flatten(net); }

Model build_model(const ExperimentConfig& c) {
  if (c.model.kind == ModelKind::network && c.model.widths.empty()) {
    throw ConfigError("model.layers: required for network models");
  }
  Model m;
  m.net = initial_network(c);
  if (c.model.kind == ModelKind::constant) {
    m.constant = c.model.value;
    m.loss = m.data_loss = [v = c.model.value](const NetworkSpec& net) {
      return LossAndGradient{v, Gradient::zeros_like(net)};
    };
    return m;
  }

  std::optional<RegularizerConfig> reg;
  if (c.lambda_sq) {
    reg = RegularizerConfig{*c.lambda_sq, c.data.n};
    reg->validate();
  }
  if (c.model.kind != ModelKind::network) {
    m.loss = [model = c.model, reg](const NetworkSpec& net) { return scalar_loss(model, reg, net); };
    m.data_loss = [model = c.model](const NetworkSpec& net) { return scalar_loss(model, std::nullopt, net); };
    return m;
  }

  m.data = make_dataset(c.data, c.data_seed(), input_width(c), output_width(c), c.model.mode);
  Batch batch{m.data->batch.inputs.topRows(static_cast<Eigen::Index>(input_width(c))), m.data->batch.targets};
  batch.validate();
  const LossKind kind = c.loss_kind();
  m.loss = [batch, kind, reg](const NetworkSpec& net) { return batch_loss(net, batch, kind, reg); };
  m.data_loss = [batch = std::move(batch), kind](const NetworkSpec& net) { return batch_loss(net, batch, kind); };
  return m;
}

namespace {

struct Entry {
  std::string name;
  Scalar* slot;
  Scalar autodiff;
  Scalar numeric;
};

}  // namespace

GradcheckResult gradient_check(const NetworkSpec& net, const LossFunction& loss, const NetworkLoss& value, double h,
                               bool kink_exemption) {
  const Gradient autodiff = loss(net).gradient;
  const Gradient numeric = finite_difference_gradient(net, value, h);
  NetworkSpec probe = net;

  std::vector<Entry> entries;
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    Layer& layer = probe.layers[l];
    const LayerTensors& a = autodiff.layers.at(l);
    const LayerTensors& f = numeric.layers.at(l);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        entries.push_back({"layer" + std::to_string(l) + ".weight(" + std::to_string(i) + "," + std::to_string(j) + ")",
                           &layer.weight(i, j), a.weight(i, j), f.weight(i, j)});
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      entries.push_back({"layer" + std::to_string(l) + ".bias(" + std::to_string(i) + ")", &layer.bias(i), a.bias(i),
                         f.bias(i)});
    }
  }

  double scale = 0.0;
  for (const Entry& e : entries) scale = std::max({scale, std::abs(e.autodiff), std::abs(e.numeric)});

  GradcheckResult r;
  r.coordinates = entries.size();
  if (scale == 0.0) return r;
  const double base = value(probe);
  for (const Entry& e : entries) {
    const double err = std::abs(e.autodiff - e.numeric) / scale;
    if (kink_exemption && err > 0.0) {
      const Scalar saved = *e.slot;
      *e.slot = saved + h;
      const double up = value(probe);
      *e.slot = saved - h;
      const double down = value(probe);
      *e.slot = saved;
      if (std::abs((up - base) - (base - down)) / h > 1e-4 * std::max(1.0, scale)) {
        ++r.exempt;
        continue;
      }
    }
    if (err > r.max_error || r.worst.empty()) {
      r.max_error = err;
      r.worst = e.name;
      r.worst_autodiff = std::abs(e.autodiff);
      r.worst_numeric = std::abs(e.numeric);
      if (net.mode == Mode::real) {
        r.worst_autodiff = e.autodiff.real();
        r.worst_numeric = e.numeric.real();
      }
    }
  }
  return r;
}

std::vector<SelectionRow> selection_study(const ExperimentConfig& first, const ExperimentConfig& second,
                                          const std::vector<std::size_t>& ns, std::size_t seeds) {
  if (!first.lambda_sq || !second.lambda_sq) throw ConfigError("reg.lambda_sq: required for model comparison");
  std::vector<SelectionRow> rows;
  for (std::size_t n : ns) {
    SelectionRow row;
    row.n = n;
    row.seeds = seeds;
    for (std::size_t s = 0; s < seeds; ++s) {
      ExperimentConfig a = first;
      ExperimentConfig b = second;
      a.data.n = b.data.n = n;
      a.data.seed = b.data.seed = s;
      try {
        const Model ma = build_model(a);
        const Model mb = build_model(b);
        const LaplaceReport ra = laplace_evidence(ma.objective(), n, *a.lambda_sq, ma.initial_point());
        const LaplaceReport rb = laplace_evidence(mb.objective(), n, *b.lambda_sq, mb.initial_point());
        const ModelComparison cmp = compare_models(ra, rb);
        if (cmp.delta_l2 < 0.0) ++row.first_preferred;
        if (cmp.bic < 0.0) ++row.bic_first_preferred;
      } catch (const Error&) {
        ++row.failures;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace covgrad::harness
