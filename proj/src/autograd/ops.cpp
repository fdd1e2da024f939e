#include "marl/autograd/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace marl::ad {
namespace {

enum class Broadcast { Same, Row, Scalar };

Broadcast broadcast_kind(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()) + ")");
}

// a (op) b with b broadcast to a's shape.
Matrix plus(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::Row:
      return a.rowwise() + b.row(0);
    case Broadcast::Scalar:
      return a.array() + b(0, 0);
    default:
      return a + b;
  }
}

Matrix minus(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::Row:
      return a.rowwise() - b.row(0);
    case Broadcast::Scalar:
      return a.array() - b(0, 0);
    default:
      return a - b;
  }
}

Matrix times(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::Row:
      return a.array().rowwise() * b.array().row(0);
    case Broadcast::Scalar:
      return a * b(0, 0);
    default:
      return a.cwiseProduct(b);
  }
}

void accumulate_reduced(Matrix& target, const Matrix& grad, Broadcast kind) {
  switch (kind) {
    case Broadcast::Same:
      target += grad;
      break;
    case Broadcast::Row:
      target += grad.colwise().sum();
      break;
    case Broadcast::Scalar:
      target(0, 0) += grad.sum();
      break;
  }
}

Graph& graph_of(Var a) {
  if (!a.valid()) throw std::logic_error("operation on an unbound Var");
  return *a.graph();
}

void same_graph(Var a, Var b) {
  if (a.graph() != b.graph()) throw std::logic_error("operands belong to different graphs");
}

// Smaller operand goes to the right so commutative ops can broadcast either way.
void order_for_broadcast(Var& a, Var& b) {
  if (a.value().size() < b.value().size()) std::swap(a, b);
}

}  // namespace

Var matmul(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  Matrix out;
  out.noalias() = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return g.emit(std::move(out), {ia, ib}, [ia, ib](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    if (g.requires_grad(ia)) g.grad(ia).noalias() += go * g.value(ib).transpose();
    if (g.requires_grad(ib)) g.grad(ib).noalias() += g.value(ia).transpose() * go;
  });
}

Var add(Var a, Var b) {
  same_graph(a, b);
  order_for_broadcast(a, b);
  Graph& g = graph_of(a);
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "add");
  Matrix out = plus(a.value(), b.value(), kind);
  const int ia = a.id(), ib = b.id();
  return g.emit(std::move(out), {ia, ib}, [ia, ib, kind](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    if (g.requires_grad(ia)) g.grad(ia) += go;
    if (g.requires_grad(ib)) accumulate_reduced(g.grad(ib), go, kind);
  });
}

Var sub(Var a, Var b) {
  same_graph(a, b);
  Graph& g = graph_of(a);
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "sub");
  Matrix out = minus(a.value(), b.value(), kind);
  const int ia = a.id(), ib = b.id();
  return g.emit(std::move(out), {ia, ib}, [ia, ib, kind](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    if (g.requires_grad(ia)) g.grad(ia) += go;
    if (g.requires_grad(ib)) accumulate_reduced(g.grad(ib), -go, kind);
  });
}

Var mul(Var a, Var b) {
  same_graph(a, b);
  order_for_broadcast(a, b);
  Graph& g = graph_of(a);
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "mul");
  Matrix out = times(a.value(), b.value(), kind);
  const int ia = a.id(), ib = b.id();
  return g.emit(std::move(out), {ia, ib}, [ia, ib, kind](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    const Matrix& av = g.value(ia);
    if (g.requires_grad(ia)) g.grad(ia) += times(go, g.value(ib), kind);
    if (g.requires_grad(ib)) accumulate_reduced(g.grad(ib), go.cwiseProduct(av), kind);
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, Real factor) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  return g.emit(a.value() * factor, {ia}, [ia, factor](Graph& g, int self) { g.grad(ia) += g.grad(self) * factor; });
}

Var add_scalar(Var a, Real offset) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  Matrix out = a.value().array() + offset;
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) { g.grad(ia) += g.grad(self); });
}

Var relu(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  return g.emit(a.value().cwiseMax(0.0), {ia}, [ia](Graph& g, int self) {
    g.grad(ia).array() += (g.value(ia).array() > 0.0).select(g.grad(self).array(), 0.0);
  });
}

Var tanh(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  Matrix out = a.value().array().tanh();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    const Matrix& y = g.value(self);
    g.grad(ia).array() += g.grad(self).array() * (1.0 - y.array().square());
  });
}

Var exp(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  Matrix out = a.value().array().exp();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    g.grad(ia).array() += g.grad(self).array() * g.value(self).array();
  });
}

Var log(Var a) {
  Graph& g = graph_of(a);
  if ((a.value().array() <= 0.0).any()) throw std::domain_error("log: non-positive input");
  const int ia = a.id();
  Matrix out = a.value().array().log();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    g.grad(ia).array() += g.grad(self).array() / g.value(ia).array();
  });
}

Var square(Var a) {
  Graph& g = graph_of(a);
  const int ia = a.id();
  Matrix out = a.value().array().square();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    g.grad(ia).array() += 2.0 * g.grad(self).array() * g.value(ia).array();
  });
}

Var layer_norm(Var a, Real epsilon) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  const Eigen::Index n = x.cols();
  Matrix out(x.rows(), n);
  std::vector<Real> inv_std(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Real mu = x.row(r).mean();
    const Real var = (x.row(r).array() - mu).square().mean();
    const Real s = 1.0 / std::sqrt(var + epsilon);
    inv_std[static_cast<std::size_t>(r)] = s;
    out.row(r) = (x.row(r).array() - mu) * s;
  }
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia, inv_std = std::move(inv_std)](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    const Matrix& xhat = g.value(self);
    Matrix& gi = g.grad(ia);
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      const Real mean_g = go.row(r).mean();
      const Real mean_gx = go.row(r).cwiseProduct(xhat.row(r)).mean();
      gi.row(r).array() +=
          inv_std[static_cast<std::size_t>(r)] * (go.row(r).array() - mean_g - xhat.row(r).array() * mean_gx);
    }
  });
}

Var softmax(Var a) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) = (x.row(r).array() - x.row(r).maxCoeff()).exp();
    out.row(r) /= out.row(r).sum();
  }
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    const Matrix& s = g.value(self);
    Matrix& gi = g.grad(ia);
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      const Real dot = go.row(r).dot(s.row(r));
      gi.row(r).array() += s.row(r).array() * (go.row(r).array() - dot);
    }
  });
}

Var log_softmax(Var a) {
  Graph& g = graph_of(a);
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Real m = x.row(r).maxCoeff();
    const Real lse = m + std::log((x.row(r).array() - m).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    const Matrix& ls = g.value(self);
    Matrix& gi = g.grad(ia);
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      const Real total = go.row(r).sum();
      gi.row(r).array() += go.row(r).array() - ls.row(r).array().exp() * total;
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Graph& g = graph_of(parts.front());
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    same_graph(parts.front(), p);
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += p.cols();
  }
  std::vector<int> parents = ids;
  return g.emit(std::move(out), std::move(parents), [ids, offsets](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Matrix& gk = g.grad(ids[k]);
      gk += go.middleCols(offsets[k], gk.cols());
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  Graph& g = graph_of(a);
  if (start < 0 || count < 0 || start + count > a.cols()) throw std::out_of_range("slice_cols: range");
  Matrix out = a.value().middleCols(start, count);
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia, start, count](Graph& g, int self) {
    g.grad(ia).middleCols(start, count) += g.grad(self);
  });
}

Var tile_cols(Var a, Eigen::Index copies) {
  Graph& g = graph_of(a);
  if (copies <= 0) throw std::invalid_argument("tile_cols: copies must be positive");
  Matrix out = a.value().replicate(1, copies);
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia, copies](Graph& g, int self) {
    const Matrix& go = g.grad(self);
    Matrix& gi = g.grad(ia);
    const Eigen::Index k = gi.cols();
    for (Eigen::Index c = 0; c < copies; ++c) gi += go.middleCols(c * k, k);
  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) { g.grad(ia).array() += g.grad(self)(0, 0); });
}

Var mean(Var a) {
  Graph& g = graph_of(a);
  const auto n = static_cast<Real>(a.value().size());
  if (n == 0) throw std::invalid_argument("mean: empty input");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia, n](Graph& g, int self) { g.grad(ia).array() += g.grad(self)(0, 0) / n; });
}

Var row_sum(Var a) {
  Graph& g = graph_of(a);
  Matrix out = a.value().rowwise().sum();
  const int ia = a.id();
  return g.emit(std::move(out), {ia}, [ia](Graph& g, int self) {
    Matrix& gi = g.grad(ia);
    gi += g.grad(self).replicate(1, gi.cols());
  });
}

Var straight_through(const Matrix& hard, Var soft) {
  Graph& g = graph_of(soft);
  if (hard.rows() != soft.rows() || hard.cols() != soft.cols())
    throw std::invalid_argument("straight_through: shape mismatch");
  const int is = soft.id();
  return g.emit(hard, {is}, [is](Graph& g, int self) { g.grad(is) += g.grad(self); });
}

Var stop_gradient(Var a) { return graph_of(a).constant(a.value()); }

}  // namespace marl::ad
