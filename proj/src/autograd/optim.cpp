#include "marl/autograd/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace marl::ad {

void adam_step(Param& p, AdamState& s, Real lr) {
  if (s.m.size() == 0) {
    s.m = Matrix::Zero(p.data.rows(), p.data.cols());
    s.v = Matrix::Zero(p.data.rows(), p.data.cols());
  }
  if (s.m.rows() != p.data.rows() || s.m.cols() != p.data.cols())
    throw std::invalid_argument("adam_step: state shape differs from " + p.name);
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * p.grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * p.grad.cwiseProduct(p.grad);
  const Real c1 = 1.0 - std::pow(s.beta1, static_cast<Real>(s.step));
  const Real c2 = 1.0 - std::pow(s.beta2, static_cast<Real>(s.step));
  p.data.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.epsilon);
  if (!p.data.allFinite()) throw std::runtime_error("adam_step: non-finite parameter " + p.name);
}

Adam::Adam(std::vector<Param*> params, Real lr) : params_(std::move(params)), states_(params_.size()), lr_(lr) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) adam_step(*params_[i], states_[i], lr_);
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

Real gradient_norm(const std::vector<Param*>& params) {
  Real sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

Real clip_gradient_norm(const std::vector<Param*>& params, Real threshold) {
  const Real norm = gradient_norm(params);
  if (norm > threshold) {
    const Real k = threshold / norm;
    for (Param* p : params) p->grad *= k;
  }
  return norm;
}

void soft_update(Param& target, const Param& source, Real tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau outside [0,1]");
  if (target.data.rows() != source.data.rows() || target.data.cols() != source.data.cols())
    throw std::invalid_argument("soft_update: shape mismatch for " + target.name);
  target.data = tau * source.data + (1.0 - tau) * target.data;
}

void soft_update(const std::vector<Param*>& targets, const std::vector<Param*>& sources, Real tau) {
  if (targets.size() != sources.size()) throw std::invalid_argument("soft_update: parameter count mismatch");
  for (std::size_t i = 0; i < targets.size(); ++i) soft_update(*targets[i], *sources[i], tau);
}

void copy_params(const std::vector<Param*>& targets, const std::vector<Param*>& sources) {
  soft_update(targets, sources, 1.0);
}

}  // namespace marl::ad
