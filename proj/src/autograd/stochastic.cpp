#include "marl/autograd/stochastic.hpp"

#include <cmath>
#include <stdexcept>

#include "marl/autograd/ops.hpp"

namespace marl::ad {

Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix n(rows, cols);
  for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = -std::log(-std::log(uniform_open(rng)));
  return n;
}

Eigen::Index argmax_row(const Matrix& scores, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.cols(); ++c)
    if (scores(row, c) > scores(row, best)) best = c;
  return best;
}

Matrix one_hot_argmax(const Matrix& scores) {
  Matrix out = Matrix::Zero(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) out(r, argmax_row(scores, r)) = 1.0;
  return out;
}

Matrix one_hot(const std::vector<int>& ids, Eigen::Index k) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), k);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= k) throw std::out_of_range("one_hot: id outside [0,K)");
    out(static_cast<Eigen::Index>(r), ids[r]) = 1.0;
  }
  return out;
}

GumbelSample gumbel_softmax(Var logits, const Matrix& noise, Real temperature, Relaxation mode) {
  if (temperature <= 0.0) throw std::invalid_argument("gumbel_softmax: temperature must be positive");
  if (noise.rows() != logits.rows() || noise.cols() != logits.cols())
    throw std::invalid_argument("gumbel_softmax: noise shape mismatch");
  if (!logits.value().allFinite()) throw std::invalid_argument("gumbel_softmax: non-finite logits");
  Graph& g = *logits.graph();
  Var perturbed = logits + g.constant(noise);
  GumbelSample s;
  s.hard = one_hot_argmax(perturbed.value());
  s.soft = softmax(scale(perturbed, 1.0 / temperature));
  s.sample = mode == Relaxation::StraightThrough ? straight_through(s.hard, s.soft) : s.soft;
  return s;
}

GumbelSample gumbel_softmax(Var logits, Rng& rng, Real temperature, Relaxation mode) {
  return gumbel_softmax(logits, gumbel_noise(logits.rows(), logits.cols(), rng), temperature, mode);
}

}  // namespace marl::ad
