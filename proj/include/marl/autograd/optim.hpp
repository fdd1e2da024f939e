#pragma once

#include <vector>

#include "marl/autograd/graph.hpp"

namespace marl::ad {

struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
};

// One bias-corrected Adam step on p from p.grad.
void adam_step(Param& p, AdamState& state, Real lr);

// Adam over a fixed list of parameters; states are matched by position.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Param*> params, Real lr);

  void step();
  void zero_grad();
  Real lr() const { return lr_; }
  void set_lr(Real lr) { lr_ = lr; }
  const std::vector<Param*>& params() const { return params_; }

 private:
  std::vector<Param*> params_;
  std::vector<AdamState> states_;
  Real lr_ = 0.0;
};

// Rescales all gradients jointly so their global L2 norm is at most threshold.
// Returns the norm before clipping.
Real clip_gradient_norm(const std::vector<Param*>& params, Real threshold = 0.5);
Real gradient_norm(const std::vector<Param*>& params);

// target <- tau * source + (1 - tau) * target
void soft_update(Param& target, const Param& source, Real tau);
void soft_update(const std::vector<Param*>& targets, const std::vector<Param*>& sources, Real tau);
void copy_params(const std::vector<Param*>& targets, const std::vector<Param*>& sources);

}  // namespace marl::ad
