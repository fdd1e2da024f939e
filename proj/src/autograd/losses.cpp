#include "marl/autograd/losses.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "marl/autograd/ops.hpp"

namespace marl::ad {
namespace {

void check_distribution(std::span<const Real> p, const char* what) {
  Real total = 0.0;
  for (Real x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": invalid probability");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument(std::string(what) + ": does not sum to 1");
}

}  // namespace

Real kl_categorical(std::span<const Real> p, std::span<const Real> q) {
  if (p.size() != q.size() || p.empty()) throw std::invalid_argument("kl_categorical: size mismatch");
  check_distribution(p, "kl_categorical p");
  check_distribution(q, "kl_categorical q");
  Real kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] <= 0.0) throw std::domain_error("kl_categorical: q has no mass where p does");
    kl += p[k] * std::log(p[k] / q[k]);
  }
  return std::max(kl, 0.0);
}

Real mse(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("mse: size mismatch");
  Real s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s / static_cast<Real>(a.size());
}

Var mse(Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("mse: shape mismatch");
  return mean(square(a - b));
}

Var kl_from_logits(Var p_logits, Var q_logits) {
  Var log_p = log_softmax(p_logits);
  Var p = softmax(p_logits);
  return row_sum(p * (log_p - log_softmax(q_logits)));
}

}  // namespace marl::ad
