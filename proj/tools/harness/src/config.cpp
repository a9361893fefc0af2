#include "covgrad/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "covgrad/errors.hpp"

namespace covgrad::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view why) {
  throw ConfigError(std::string(key) + ": " + std::string(why));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) bad(key, "expected a number, got '" + std::string(v) + "'");
  if (!std::isfinite(out)) bad(key, "value must be finite");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    bad(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::size_t to_count(std::string_view key, std::string_view v, std::size_t min = 1) {
  const std::uint64_t n = to_u64(key, v);
  if (n < min) bad(key, "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(n);
}

double to_positive(std::string_view key, std::string_view v) {
  const double x = to_double(key, v);
  if (!(x > 0.0)) bad(key, "must be positive");
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad(key, "expected true or false");
}

template <class E>
E to_enum(std::string_view key, std::string_view v, std::initializer_list<std::pair<std::string_view, E>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (v == name) return value;
    names += names.empty() ? "" : " | ";
    names += name;
  }
  bad(key, "expected one of " + names + ", got '" + std::string(v) + "'");
}

Activation to_activation(std::string_view key, std::string_view v) {
  return to_enum<Activation>(key, v,
                             {{"identity", Activation::identity},
                              {"sigmoid", Activation::sigmoid},
                              {"relu", Activation::relu},
                              {"tanh", Activation::tanh}});
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](auto& c, auto k, auto v) { c.seed = to_u64(k, v); }},
      {"model.kind",
       [](auto& c, auto k, auto v) {
         c.model.kind = to_enum<ModelKind>(k, v,
                                           {{"network", ModelKind::network},
                                            {"quadratic", ModelKind::quadratic},
                                            {"quartic", ModelKind::quartic},
                                            {"double_well", ModelKind::double_well},
                                            {"constant", ModelKind::constant}});
       }},
      {"model.mode",
       [](auto& c, auto k, auto v) {
         c.model.mode = to_enum<Mode>(k, v, {{"real", Mode::real}, {"complex", Mode::complex}});
       }},
      {"model.layers",
       [](auto& c, auto k, auto v) {
         c.model.widths.clear();
         for (auto item : split_list(v)) c.model.widths.push_back(to_count(k, item));
         if (c.model.widths.size() < 2) bad(k, "needs an input width and at least one layer width");
       }},
      {"model.activations",
       [](auto& c, auto k, auto v) {
         c.model.activations.clear();
         for (auto item : split_list(v)) c.model.activations.push_back(to_activation(k, item));
       }},
      {"model.bias", [](auto& c, auto k, auto v) { c.model.bias = to_bool(k, v); }},
      {"model.init_scale",
       [](auto& c, auto k, auto v) {
         c.model.init_scale = to_double(k, v);
         if (c.model.init_scale < 0.0) bad(k, "must be non-negative");
       }},
      {"model.init",
       [](auto& c, auto k, auto v) {
         c.model.init.clear();
         for (auto item : split_list(v)) c.model.init.push_back(to_double(k, item));
       }},
      {"model.init_imag",
       [](auto& c, auto k, auto v) {
         c.model.init_imag.clear();
         for (auto item : split_list(v)) c.model.init_imag.push_back(to_double(k, item));
       }},
      {"model.curvature", [](auto& c, auto k, auto v) { c.model.curvature = to_double(k, v); }},
      {"model.center", [](auto& c, auto k, auto v) { c.model.center = to_double(k, v); }},
      {"model.alpha", [](auto& c, auto k, auto v) { c.model.alpha = to_double(k, v); }},
      {"model.value", [](auto& c, auto k, auto v) { c.model.value = to_double(k, v); }},
      {"data.kind",
       [](auto& c, auto k, auto v) {
         c.data.kind = to_enum<DataKind>(k, v,
                                         {{"none", DataKind::none},
                                          {"regression", DataKind::regression},
                                          {"classification", DataKind::classification},
                                          {"logistic", DataKind::logistic}});
       }},
      {"data.seed", [](auto& c, auto k, auto v) { c.data.seed = to_u64(k, v); }},
      {"data.n", [](auto& c, auto k, auto v) { c.data.n = to_count(k, v); }},
      {"data.classes", [](auto& c, auto k, auto v) { c.data.classes = to_count(k, v, 2); }},
      {"data.features", [](auto& c, auto k, auto v) { c.data.features = to_count(k, v); }},
      {"data.noise",
       [](auto& c, auto k, auto v) {
         c.data.noise = to_double(k, v);
         if (c.data.noise < 0.0) bad(k, "must be non-negative");
       }},
      {"data.slope", [](auto& c, auto k, auto v) { c.data.slope = to_double(k, v); }},
      {"data.intercept", [](auto& c, auto k, auto v) { c.data.intercept = to_double(k, v); }},
      {"loss",
       [](auto& c, auto k, auto v) {
         c.loss = to_enum<LossKind>(k, v,
                                    {{"euclidean", LossKind::euclidean}, {"cross_entropy", LossKind::cross_entropy}});
       }},
      {"opt",
       [](auto& c, auto k, auto v) {
         c.optimizer = to_enum<OptimizerKind>(k, v,
                                              {{"aristotle", OptimizerKind::aristotle},
                                               {"momentum", OptimizerKind::momentum},
                                               {"damped", OptimizerKind::damped},
                                               {"cogradient", OptimizerKind::cogradient}});
       }},
      {"opt.eta", [](auto& c, auto k, auto v) { c.hyper.eta = to_positive(k, v); }},
      {"opt.dt", [](auto& c, auto k, auto v) { c.hyper.dt = to_positive(k, v); }},
      {"opt.mass", [](auto& c, auto k, auto v) { c.hyper.mass = to_positive(k, v); }},
      {"opt.friction",
       [](auto& c, auto k, auto v) {
         c.hyper.friction = to_double(k, v);
         if (c.hyper.friction < 0.0) bad(k, "must be non-negative");
       }},
      {"opt.beta", [](auto& c, auto k, auto v) { c.hyper.beta = to_positive(k, v); }},
      {"opt.epsilon", [](auto& c, auto k, auto v) { c.hyper.epsilon = to_positive(k, v); }},
      {"opt.steps", [](auto& c, auto k, auto v) { c.steps = to_count(k, v); }},
      {"reg.lambda_sq", [](auto& c, auto k, auto v) { c.lambda_sq = to_positive(k, v); }},
      {"evidence.quadrature", [](auto& c, auto k, auto v) { c.quadrature = to_bool(k, v); }},
      {"gradcheck.h", [](auto& c, auto k, auto v) { c.gradcheck_h = to_positive(k, v); }},
      {"oracle.tolerance", [](auto& c, auto k, auto v) { c.oracle_tolerance = to_positive(k, v); }},
      {"out.trajectory",
       [](auto& c, auto k, auto v) {
         if (v.empty() || v.find('/') != std::string_view::npos) bad(k, "expected a plain file name");
         c.trajectory_file = std::string(v);
       }},
      {"out.every", [](auto& c, auto k, auto v) { c.record_every = to_count(k, v); }},
      {"census.dimension", [](auto& c, auto k, auto v) { c.census.dimension = to_count(k, v); }},
      {"census.trials", [](auto& c, auto k, auto v) { c.census.trials = to_count(k, v, 100); }},
      {"census.model",
       [](auto& c, auto k, auto v) {
         c.census.model = to_enum<CensusModel>(
             k, v, {{"independent-signs", CensusModel::independent_signs},
                    {"random-symmetric", CensusModel::random_symmetric}});
       }},
  };
  return table;
}

constexpr std::string_view kMetricPrefix = "metric.layer";

void set_metric(ExperimentConfig& c, std::string_view key, std::string_view v) {
  const std::string_view index = key.substr(kMetricPrefix.size());
  const std::size_t i = to_count(key, index, 0);
  if (v == "frozen") {
    c.metric.insert_or_assign(i, Stiffness::frozen());
  } else {
    c.metric.insert_or_assign(i, Stiffness::scaled(to_positive(key, v)));
  }
}

void validate(const ExperimentConfig& c) {
  const ModelConfig& m = c.model;
  if (m.kind == ModelKind::network && !m.widths.empty()) {
    const std::size_t layers = m.widths.size() - 1;
    if (m.activations.size() != 1 && m.activations.size() != layers) {
      bad("model.activations", "give one activation or one per layer (" + std::to_string(layers) + ")");
    }
    if (m.mode == Mode::complex) {
      for (Activation a : m.activations) {
        if (!allowed_in_complex_mode(a)) bad("model.activations", std::string(to_string(a)) + " is real mode only");
      }
    }
    if (c.data.kind == DataKind::none) bad("data.kind", "network models need a data generator");
    if (c.data.features != 0 && c.data.features < m.widths.front()) {
      bad("data.features", "must be at least the model input width");
    }
    for (const auto& [i, s] : c.metric) {
      if (i >= layers) bad("metric.layer" + std::to_string(i), "the model has " + std::to_string(layers) + " layers");
    }
  } else if (m.kind != ModelKind::network) {
    if (!m.widths.empty()) bad("model.layers", "only valid for network models");
    if (c.data.kind != DataKind::none) bad("data.kind", "scalar models take no data");
    for (const auto& [i, s] : c.metric) {
      if (i >= 1) bad("metric.layer" + std::to_string(i), "scalar models have a single layer");
    }
    if (m.kind != ModelKind::constant && m.init.size() > 1) bad("model.init", "scalar models take one value");
    if (m.kind == ModelKind::constant && !m.init.empty()) bad("model.init", "constant models have no parameters");
  }
  if (!m.init_imag.empty()) {
    if (m.mode != Mode::complex) bad("model.init_imag", "only valid in complex mode");
    if (m.init_imag.size() != m.init.size()) bad("model.init_imag", "must match the length of model.init");
  }
  if (c.data.kind == DataKind::logistic && c.data.classes != 2) bad("data.classes", "logistic data is binary");
  const LossKind loss = c.loss_kind();
  if (loss == LossKind::cross_entropy) {
    if (m.mode == Mode::complex) bad("loss", "cross_entropy is real mode only");
    if (c.data.kind != DataKind::classification && c.data.kind != DataKind::logistic) {
      bad("loss", "cross_entropy needs classification or logistic data");
    }
  } else if (c.data.kind == DataKind::classification || c.data.kind == DataKind::logistic) {
    bad("loss", "class labels need the cross_entropy loss");
  }
  if (c.optimizer == OptimizerKind::cogradient && m.mode == Mode::complex) bad("opt", "cogradient is real mode only");
  try {
    c.hyper.validate(c.optimizer);
  } catch (const ConfigError& e) {
    bad("opt", e.what());
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::network: return "network";
    case ModelKind::quadratic: return "quadratic";
    case ModelKind::quartic: return "quartic";
    case ModelKind::double_well: return "double_well";
    case ModelKind::constant: return "constant";
  }
  return "?";
}

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::none: return "none";
    case DataKind::regression: return "regression";
    case DataKind::classification: return "classification";
    case DataKind::logistic: return "logistic";
  }
  return "?";
}

LossKind ExperimentConfig::loss_kind() const {
  if (loss) return *loss;
  return data.kind == DataKind::classification || data.kind == DataKind::logistic ? LossKind::cross_entropy
                                                                                  : LossKind::euclidean;
}

LayerMetric ExperimentConfig::layer_metric(std::size_t layers) const {
  std::vector<Stiffness> out(layers, Stiffness::scaled(1.0));
  for (const auto& [i, s] : metric) {
    if (i < layers) out[i] = s;
  }
  return LayerMetric(std::move(out));
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  ExperimentConfig c;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  bool quartic_alpha_set = false;
  bool quartic_curvature_set = false;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) throw ConfigError(std::string(key) + ": duplicate key (" + where + ")");
    try {
      if (key.starts_with(kMetricPrefix) && key.size() > kMetricPrefix.size()) {
        set_metric(c, key, value);
      } else if (const auto it = setters().find(key); it != setters().end()) {
        it->second(c, key, value);
      } else {
        throw ConfigError(std::string(key) + ": unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (" + where + ")");
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string(key) + ": " + e.what() + " (" + where + ")");
    }
    quartic_alpha_set |= key == "model.alpha";
    quartic_curvature_set |= key == "model.curvature";
  }
  if (c.model.kind == ModelKind::quartic) {
    if (!quartic_alpha_set) c.model.alpha = 1.0;
    if (!quartic_curvature_set) c.model.curvature = 0.0;
  }
  if (c.model.kind == ModelKind::double_well && !quartic_alpha_set) c.model.alpha = 1.0;
  if (c.model.kind == ModelKind::double_well && c.model.center == 0.0 && !seen.contains("model.center")) {
    c.model.center = 1.0;
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

const std::vector<std::string>& schema_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, s] : setters()) out.push_back(k);
    out.push_back(std::string(kMetricPrefix) + "<i>");
    return out;
  }();
  return keys;
}

}  // namespace covgrad::harness
