#pragma once

#include <vector>

#include "marl/autograd/graph.hpp"

// Differentiable operations on batched matrices (rows = samples).
//
// Binary element-wise ops accept a right operand that is either the same shape as the
// left one, a 1 x n row broadcast over every row, or a 1 x 1 scalar.
namespace marl::ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, Real factor);
Var add_scalar(Var a, Real offset);

Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);

// Row-wise normalisation to zero mean / unit variance, no affine part.
Var layer_norm(Var a, Real epsilon = 1e-8);
Var softmax(Var a);
Var log_softmax(Var a);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
// B x K -> B x (copies*K); column m of the result is column (m mod K) of the input.
Var tile_cols(Var a, Eigen::Index copies);

Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);

// Forward value `hard`, gradient passed unchanged to `soft`.
Var straight_through(const Matrix& hard, Var soft);
Var stop_gradient(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(Var a, Real k) { return scale(a, k); }
inline Var operator*(Real k, Var a) { return scale(a, k); }

}  // namespace marl::ad
