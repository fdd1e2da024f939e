#include "marl/autograd/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "marl/autograd/ops.hpp"

namespace marl::ad {
namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Real bound, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -bound, bound);
  return m;
}

}  // namespace

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng) {
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(in));
  weight = Param(name + ".w", uniform_matrix(in, out, bound, rng));
  bias = Param(name + ".b", uniform_matrix(1, out, bound, rng));
}

Var Linear::forward(Graph& g, Var x, bool track) {
  return matmul(x, g.bind(weight, track)) + g.bind(bias, track);
}

Mlp::Mlp(std::string name, MlpSpec spec, Rng& rng) : name_(std::move(name)), spec_(std::move(spec)) {
  if (spec_.input_dim <= 0 || spec_.output_dim <= 0 || spec_.hidden_dims.empty())
    throw std::invalid_argument("Mlp " + name_ + ": bad dimensions");
  Eigen::Index in = spec_.input_dim;
  for (std::size_t l = 0; l < spec_.hidden_dims.size(); ++l) {
    const Eigen::Index width = spec_.hidden_dims[l];
    const std::string prefix = name_ + ".h" + std::to_string(l);
    Hidden h;
    h.linear = Linear(prefix, in, width, rng);
    h.gain = Param(prefix + ".ln_gain", Matrix::Ones(1, width));
    h.shift = Param(prefix + ".ln_shift", Matrix::Zero(1, width));
    hidden_.push_back(std::move(h));
    in = width;
  }
  out_ = Linear(name_ + ".out", in, spec_.output_dim, rng);
}

Var Mlp::trunk(Graph& g, Var x, std::optional<Var> mask, bool track) {
  if (x.cols() != spec_.input_dim)
    throw std::invalid_argument("Mlp " + name_ + ": input width " + std::to_string(x.cols()) + ", expected " +
                                std::to_string(spec_.input_dim));
  if (!x.value().allFinite()) throw std::invalid_argument("Mlp " + name_ + ": non-finite input");
  Var h = x;
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    Hidden& layer = hidden_[l];
    h = layer.linear.forward(g, h, track);
    if (spec_.layer_norm) h = layer_norm(h) * g.bind(layer.gain, track) + g.bind(layer.shift, track);
    if (l == 0 && mask) {
      const Eigen::Index k = mask->cols();
      if (k <= 0 || h.cols() % k != 0)
        throw std::invalid_argument("Mlp " + name_ + ": hidden width not divisible by mask size");
      if (mask->rows() != h.rows()) throw std::invalid_argument("Mlp " + name_ + ": mask batch mismatch");
      h = h * tile_cols(*mask, h.cols() / k);
    }
    h = relu(h);
  }
  return h;
}

Var Mlp::head(Graph& g, Var features, bool track) {
  return apply_output(out_.forward(g, features, track), spec_.output_activation);
}

Var Mlp::forward(Graph& g, Var x, std::optional<Var> mask, bool track) {
  return head(g, trunk(g, x, mask, track), track);
}

Matrix Mlp::evaluate(const Matrix& x, const Matrix* mask) const {
  Graph g;
  auto& self = const_cast<Mlp&>(*this);
  std::optional<Var> m;
  if (mask != nullptr) m = g.constant(*mask);
  return self.forward(g, g.constant(x), m, false).value();
}

std::vector<Param*> Mlp::params() {
  std::vector<Param*> out;
  for (Hidden& h : hidden_) {
    out.push_back(&h.linear.weight);
    out.push_back(&h.linear.bias);
    if (spec_.layer_norm) {
      out.push_back(&h.gain);
      out.push_back(&h.shift);
    }
  }
  out.push_back(&out_.weight);
  out.push_back(&out_.bias);
  return out;
}

std::vector<const Param*> Mlp::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Mlp&>(*this).params()) out.push_back(p);
  return out;
}

Var apply_output(Var x, OutputActivation act) {
  switch (act) {
    case OutputActivation::Linear:
      return x;
    case OutputActivation::Tanh:
      return tanh(x);
    case OutputActivation::Softmax:
      return softmax(x);
  }
  return x;
}

}  // namespace marl::ad
