#pragma once

#include <span>

#include "marl/autograd/graph.hpp"

namespace marl::ad {

// sum_k p_k ln(p_k / q_k). Both inputs must be distributions (sum 1 within 1e-6)
// and q must be positive wherever p is.
Real kl_categorical(std::span<const Real> p, std::span<const Real> q);
Real mse(std::span<const Real> a, std::span<const Real> b);

// Mean of squared differences over every entry.
Var mse(Var a, Var b);
// B x 1 column of KL(softmax(p_logits) || softmax(q_logits)) per row.
Var kl_from_logits(Var p_logits, Var q_logits);

}  // namespace marl::ad
