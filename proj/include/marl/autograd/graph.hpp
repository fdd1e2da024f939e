#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace marl::ad {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A named weight array and its gradient accumulator. Shapes are 2-D; biases are 1 x n.
struct Param {
  Param() = default;
  Param(std::string name, Matrix data);

  std::string name;
  Matrix data;
  Matrix grad;

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return data.size(); }
};

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1 x 1 node.
  Real scalar() const;

  int id() const { return id_; }
  Graph* graph() const { return graph_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is a topological
// order of the DAG; backward() walks it once in reverse.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph& graph, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = delete;
  Graph& operator=(Graph&&) = delete;

  Var constant(Matrix value);
  // Leaf bound to a parameter; backward() accumulates into p.grad.
  Var param(Param& p);
  // Leaf for a parameter that must not receive gradient.
  Var frozen(const Param& p) { return constant(p.data); }
  Var bind(Param& p, bool track) { return track ? param(p) : frozen(p); }

  // Appends a derived node. The closure is dropped when no parent needs gradient.
  Var emit(Matrix value, std::vector<int> parents, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws if loss is not 1 x 1 or if any
  // parameter gradient comes out non-finite.
  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  // Gradient buffer of a node, zero-initialised on first access.
  Matrix& grad(int id);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> parents;
    BackwardFn backward;
    Param* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace marl::ad
