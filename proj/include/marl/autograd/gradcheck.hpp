#pragma once

#include <functional>
#include <string>
#include <vector>

#include "marl/autograd/graph.hpp"

namespace marl::ad {

struct GradCheckReport {
  Real max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  Real analytic = 0.0;
  Real numeric = 0.0;
};

// Builds the loss with `loss_fn` (which must bind the params through Graph::param),
// back-propagates once, then compares every coordinate against central differences.
// Error per coordinate is |a - n| / max(|a|, |n|, floor).
GradCheckReport finite_diff_check(const std::function<Var(Graph&)>& loss_fn, const std::vector<Param*>& params,
                                  Real epsilon = 1e-5, Real floor = 1e-6);

}  // namespace marl::ad
