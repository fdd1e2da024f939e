#pragma once

#include "marl/autograd/graph.hpp"
#include "marl/core/random.hpp"

namespace marl::ad {

enum class Relaxation {
  StraightThrough,  // forward one-hot, gradient through the soft sample
  Soft,             // forward and backward through the soft sample
};

struct GumbelSample {
  Matrix hard;  // one-hot rows
  Var soft;     // softmax((logits + noise) / temperature)
  Var sample;   // what downstream layers consume
};

// Standard Gumbel draws -log(-log u).
Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng);

GumbelSample gumbel_softmax(Var logits, const Matrix& noise, Real temperature = 1.0,
                            Relaxation mode = Relaxation::StraightThrough);
GumbelSample gumbel_softmax(Var logits, Rng& rng, Real temperature = 1.0,
                            Relaxation mode = Relaxation::StraightThrough);

// Row-wise one-hot of the argmax; ties go to the lowest index.
Matrix one_hot_argmax(const Matrix& scores);
Eigen::Index argmax_row(const Matrix& scores, Eigen::Index row);
Matrix one_hot(const std::vector<int>& ids, Eigen::Index k);

}  // namespace marl::ad
