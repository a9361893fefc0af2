#include "covgrad/tape.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <string>

#include "covgrad/errors.hpp"

namespace covgrad {

std::string_view to_string(Mode mode) {
  return mode == Mode::real ? "real" : "complex";
}

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Scalar apply(Activation f, Scalar z) {
  switch (f) {
    case Activation::identity: return z;
    case Activation::sigmoid: return {sigmoid(z.real()), 0.0};
    case Activation::relu: return {z.real() > 0.0 ? z.real() : 0.0, 0.0};
    case Activation::tanh: return {std::tanh(z.real()), std::tanh(z.imag())};
  }
  return z;
}

// Conjugate cotangent of the input given that of the output. For the real
// functions the Jacobian is a real scalar; split tanh acts per component.
Scalar pull(Activation f, Scalar z, Scalar out, Scalar cot) {
  switch (f) {
    case Activation::identity: return cot;
    case Activation::sigmoid: return cot * (out.real() * (1.0 - out.real()));
    case Activation::relu: return z.real() > 0.0 ? cot : Scalar{0.0, 0.0};
    case Activation::tanh:
      return {cot.real() * (1.0 - out.real() * out.real()),
              cot.imag() * (1.0 - out.imag() * out.imag())};
  }
  return cot;
}

void accumulate(Matrix& into, const Matrix& delta) {
  if (into.size() == 0) {
    into = delta;
  } else {
    into += delta;
  }
}

}  // namespace

TapeGradient::TapeGradient(Mode mode, std::vector<NodeId> variables, std::vector<Matrix> gradients)
    : mode_(mode), variables_(std::move(variables)), gradients_(std::move(gradients)) {}

const Matrix& TapeGradient::of(NodeId variable) const {
  const auto it = std::find(variables_.begin(), variables_.end(), variable);
  if (it == variables_.end()) {
    throw ContractError("node " + std::to_string(variable) + " is not a variable of the tape");
  }
  return gradients_[static_cast<std::size_t>(it - variables_.begin())];
}

Tape::Tape(Mode mode) : mode_(mode) {}

void Tape::check_node(NodeId id) const {
  if (id >= nodes_.size()) {
    throw ContractError("node " + std::to_string(id) + " does not exist on the tape");
  }
}

void Tape::require_real_mode(const char* op) const {
  if (mode_ != Mode::real) {
    throw ContractError(std::string(op) + " is only defined for real-mode tapes");
  }
}

NodeId Tape::push(Node node) {
  const Matrix* a = nullptr;
  const Matrix* b = nullptr;
  switch (node.op) {
    case Op::constant:
    case Op::variable:
      break;
    case Op::matmul:
    case Op::add_bias:
    case Op::add:
    case Op::sub:
    case Op::mul:
      check_node(node.a);
      check_node(node.b);
      a = &nodes_[node.a].value;
      b = &nodes_[node.b].value;
      break;
    default:
      check_node(node.a);
      a = &nodes_[node.a].value;
      break;
  }

  switch (node.op) {
    case Op::matmul:
      if (a->cols() != b->rows()) {
        throw ShapeError("matmul: " + dims(*a) + " times " + dims(*b));
      }
      break;
    case Op::add_bias:
      if (b->cols() != 1 || b->rows() != a->rows()) {
        throw ShapeError("add_bias: bias " + dims(*b) + " does not fit " + dims(*a));
      }
      break;
    case Op::add:
    case Op::sub:
    case Op::mul:
      if (a->rows() != b->rows() || a->cols() != b->cols()) {
        throw ShapeError("elementwise op: " + dims(*a) + " versus " + dims(*b));
      }
      break;
    case Op::cross_entropy:
    case Op::euclidean:
      if (a->rows() != node.data.rows() || a->cols() != node.data.cols()) {
        throw ShapeError("loss target " + dims(node.data) + " does not match prediction " + dims(*a));
      }
      break;
    default:
      break;
  }

  node.value = evaluate(node, a, b);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Tape::constant(Matrix value) {
  if (mode_ == Mode::real && !is_real(value)) {
    throw ContractError("real-mode tape given a constant with imaginary parts");
  }
  Node n;
  n.op = Op::constant;
  n.data = std::move(value);
  return push(std::move(n));
}

NodeId Tape::variable(Matrix value, std::optional<ParamTag> tag) {
  if (mode_ == Mode::real && !is_real(value)) {
    throw ContractError("real-mode tape given a variable with imaginary parts");
  }
  Node n;
  n.op = Op::variable;
  n.data = std::move(value);
  n.tag = tag;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) { return push({Op::matmul, a, b, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::add_bias(NodeId y, NodeId b) { return push({Op::add_bias, y, b, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::add(NodeId a, NodeId b) { return push({Op::add, a, b, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::sub(NodeId a, NodeId b) { return push({Op::sub, a, b, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::mul(NodeId a, NodeId b) { return push({Op::mul, a, b, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::conj(NodeId a) { return push({Op::conj, a, 0, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::scale(NodeId a, Scalar factor) { return push({Op::scale, a, 0, {}, {}, factor, {}, {}}); }
NodeId Tape::sum(NodeId a) { return push({Op::sum, a, 0, {}, {}, {1.0, 0.0}, {}, {}}); }
NodeId Tape::prepend_zero_row(NodeId a) { return push({Op::prepend_zero_row, a, 0, {}, {}, {1.0, 0.0}, {}, {}}); }

NodeId Tape::activate(NodeId a, Activation f) {
  if (!allowed_in_complex_mode(f)) require_real_mode(to_string(f).data());
  return push({Op::activate, a, 0, {}, {}, {1.0, 0.0}, f, {}});
}

NodeId Tape::softmax(NodeId logits) {
  require_real_mode("softmax");
  return push({Op::softmax, logits, 0, {}, {}, {1.0, 0.0}, {}, {}});
}

NodeId Tape::cross_entropy(NodeId probabilities, Matrix target) {
  require_real_mode("cross_entropy");
  if (!is_real(target) || (target.real().array() < 0.0).any()) {
    throw DomainError("cross_entropy: target probabilities must be real and non-negative");
  }
  return push({Op::cross_entropy, probabilities, 0, {}, std::move(target), {1.0, 0.0}, {}, {}});
}

NodeId Tape::euclidean(NodeId yhat, Matrix target) {
  if (mode_ == Mode::real && !is_real(target)) {
    throw ContractError("real-mode tape given a complex regression target");
  }
  return push({Op::euclidean, yhat, 0, {}, std::move(target), {1.0, 0.0}, {}, {}});
}

Matrix Tape::evaluate(const Node& node, const Matrix* a, const Matrix* b) const {
  switch (node.op) {
    case Op::constant:
    case Op::variable:
      return node.data;
    case Op::matmul:
      return (*a) * (*b);
    case Op::add_bias:
      return a->colwise() + b->col(0);
    case Op::add:
      return *a + *b;
    case Op::sub:
      return *a - *b;
    case Op::mul:
      return a->cwiseProduct(*b);
    case Op::conj:
      return a->conjugate();
    case Op::scale:
      return *a * node.factor;
    case Op::sum:
      return Matrix::Constant(1, 1, a->sum());
    case Op::activate:
      return a->unaryExpr([f = node.activation](Scalar z) { return apply(f, z); });
    case Op::softmax: {
      Matrix out(a->rows(), a->cols());
      for (Eigen::Index j = 0; j < a->cols(); ++j) {
        const Eigen::VectorXd col = a->col(j).real();
        const Eigen::ArrayXd e = (col.array() - col.maxCoeff()).exp();
        out.col(j) = (e / e.sum()).matrix().cast<Scalar>();
      }
      return out;
    }
    case Op::cross_entropy: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < a->size(); ++i) {
        const double p = node.data.data()[i].real();
        if (p == 0.0) continue;
        const double q = a->data()[i].real();
        if (!(q > 0.0)) {
          throw DomainError("cross_entropy: predicted probability " + std::to_string(q) +
                            " for a class with target mass " + std::to_string(p));
        }
        total -= p * std::log(q);
      }
      return Matrix::Constant(1, 1, total);
    }
    case Op::euclidean:
      return Matrix::Constant(1, 1, 0.5 * (*a - node.data).squaredNorm());
    case Op::prepend_zero_row: {
      Matrix out = Matrix::Zero(a->rows() + 1, a->cols());
      out.bottomRows(a->rows()) = *a;
      return out;
    }
  }
  return {};
}

void Tape::set_output(NodeId node) {
  check_node(node);
  output_ = node;
}

const Matrix& Tape::value(NodeId node) const {
  check_node(node);
  return nodes_[node].value;
}

std::optional<ParamTag> Tape::tag(NodeId node) const {
  check_node(node);
  return nodes_[node].tag;
}

bool Tape::is_variable(NodeId node) const {
  check_node(node);
  return nodes_[node].op == Op::variable;
}

void Tape::check_scalar_output() const {
  if (!output_) throw ContractError("tape has no output node");
  const Matrix& v = nodes_[*output_].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("tape output is " + dims(v) + ", not a scalar loss");
  }
  const Scalar s = v(0, 0);
  if (std::abs(s.imag()) > 1e-12 * std::max(1.0, std::abs(s.real()))) {
    throw ContractError("tape output is not real (imaginary part " + std::to_string(s.imag()) + ")");
  }
}

double Tape::loss() const {
  check_scalar_output();
  return nodes_[*output_].value(0, 0).real();
}

double Tape::replay() const {
  check_scalar_output();
  std::vector<Matrix> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    const Matrix* a = n.op == Op::constant || n.op == Op::variable ? nullptr : &values[n.a];
    const Matrix* b = nullptr;
    switch (n.op) {
      case Op::matmul:
      case Op::add_bias:
      case Op::add:
      case Op::sub:
      case Op::mul:
        b = &values[n.b];
        break;
      default:
        break;
    }
    values.push_back(evaluate(n, a, b));
  }
  return values[*output_](0, 0).real();
}

TapeGradient Tape::pullback() const {
  check_scalar_output();
  std::vector<Matrix> cot(nodes_.size());
  cot[*output_] = Matrix::Constant(1, 1, Scalar{1.0, 0.0});

  for (std::size_t k = *output_ + 1; k-- > 0;) {
    const Matrix& g = cot[k];
    if (g.size() == 0) continue;
    const Node& n = nodes_[k];
    switch (n.op) {
      case Op::constant:
      case Op::variable:
        break;
      case Op::matmul:
        accumulate(cot[n.a], g * nodes_[n.b].value.adjoint());
        accumulate(cot[n.b], nodes_[n.a].value.adjoint() * g);
        break;
      case Op::add_bias:
        accumulate(cot[n.a], g);
        accumulate(cot[n.b], g.rowwise().sum());
        break;
      case Op::add:
        accumulate(cot[n.a], g);
        accumulate(cot[n.b], g);
        break;
      case Op::sub:
        accumulate(cot[n.a], g);
        accumulate(cot[n.b], -g);
        break;
      case Op::mul:
        accumulate(cot[n.a], g.cwiseProduct(nodes_[n.b].value.conjugate()));
        accumulate(cot[n.b], g.cwiseProduct(nodes_[n.a].value.conjugate()));
        break;
      case Op::conj:
        accumulate(cot[n.a], g.conjugate());
        break;
      case Op::scale:
        accumulate(cot[n.a], g * std::conj(n.factor));
        break;
      case Op::sum:
        accumulate(cot[n.a], Matrix::Constant(nodes_[n.a].value.rows(), nodes_[n.a].value.cols(), g(0, 0)));
        break;
      case Op::activate: {
        const Matrix& in = nodes_[n.a].value;
        Matrix d(in.rows(), in.cols());
        for (Eigen::Index i = 0; i < in.size(); ++i) {
          d.data()[i] = pull(n.activation, in.data()[i], n.value.data()[i], g.data()[i]);
        }
        accumulate(cot[n.a], d);
        break;
      }
      case Op::softmax: {
        const Matrix& p = n.value;
        Matrix d(p.rows(), p.cols());
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
          const Scalar inner = g.col(j).cwiseProduct(p.col(j)).sum();
          d.col(j) = p.col(j).cwiseProduct(g.col(j) - Vector::Constant(p.rows(), inner));
        }
        accumulate(cot[n.a], d);
        break;
      }
      case Op::cross_entropy: {
        const Matrix& q = nodes_[n.a].value;
        const double upstream = g(0, 0).real();
        Matrix d = Matrix::Zero(q.rows(), q.cols());
        for (Eigen::Index i = 0; i < q.size(); ++i) {
          const double p = n.data.data()[i].real();
          if (p != 0.0) d.data()[i] = -upstream * p / q.data()[i].real();
        }
        accumulate(cot[n.a], d);
        break;
      }
      case Op::euclidean:
        accumulate(cot[n.a], g(0, 0).real() * (nodes_[n.a].value - n.data));
        break;
      case Op::prepend_zero_row:
        accumulate(cot[n.a], g.bottomRows(g.rows() - 1));
        break;
    }
  }

  std::vector<NodeId> vars;
  std::vector<Matrix> grads;
  const double wirtinger = mode_ == Mode::complex ? 0.5 : 1.0;
  for (NodeId k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].op != Op::variable) continue;
    vars.push_back(k);
    const Matrix& v = nodes_[k].value;
    grads.push_back(cot[k].size() == 0 ? Matrix::Zero(v.rows(), v.cols()) : Matrix(cot[k] * wirtinger));
  }
  return TapeGradient(mode_, std::move(vars), std::move(grads));
}

bool Tape::identical(const Tape& other) const {
  if (mode_ != other.mode_ || nodes_.size() != other.nodes_.size() || output_ != other.output_) {
    return false;
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& x = nodes_[k];
    const Node& y = other.nodes_[k];
    if (x.op != y.op || x.a != y.a || x.b != y.b || x.activation != y.activation || x.tag != y.tag) {
      return false;
    }
    if (x.value.rows() != y.value.rows() || x.value.cols() != y.value.cols()) return false;
    if (!std::equal(x.value.data(), x.value.data() + x.value.size(), y.value.data(),
                    [](Scalar u, Scalar v) {
                      return std::bit_cast<std::array<std::uint64_t, 2>>(u) ==
                             std::bit_cast<std::array<std::uint64_t, 2>>(v);
                    })) {
      return false;
    }
  }
  return true;
}

}  // namespace covgrad
