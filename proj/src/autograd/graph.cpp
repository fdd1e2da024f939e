#include "marl/autograd/graph.hpp"

#include <stdexcept>

namespace marl::ad {

Param::Param(std::string name_, Matrix data_)
    : name(std::move(name_)), data(std::move(data_)), grad(Matrix::Zero(data.rows(), data.cols())) {}

const Matrix& Var::value() const { return graph_->value(id_); }

Real Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::logic_error("Var::scalar on a non-scalar node");
  return v(0, 0);
}

Var Graph::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::param(Param& p) {
  Node node;
  node.value = p.data;
  node.param = &p;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::emit(Matrix value, std::vector<int> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (int p : parents) node.requires_grad = node.requires_grad || requires_grad(p);
  node.parents = std::move(parents);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Graph::grad(int id) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph() != this) throw std::logic_error("backward: loss belongs to another graph");
  if (loss.rows() != 1 || loss.cols() != 1) throw std::invalid_argument("backward: loss must be scalar");
  grad(loss.id()).setOnes();
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, id);
    if (node.param != nullptr) {
      if (!node.grad.allFinite())
        throw std::runtime_error("backward: non-finite gradient for parameter " + node.param->name);
      node.param->grad += node.grad;
    }
  }
}

}  // namespace marl::ad
