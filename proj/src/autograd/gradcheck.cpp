#include "marl/autograd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace marl::ad {

GradCheckReport finite_diff_check(const std::function<Var(Graph&)>& loss_fn, const std::vector<Param*>& params,
                                  Real epsilon, Real floor) {
  for (Param* p : params) p->zero_grad();
  {
    Graph g;
    g.backward(loss_fn(g));
  }
  auto eval = [&] {
    Graph g;
    return loss_fn(g).scalar();
  };

  GradCheckReport report;
  for (Param* p : params) {
    const Matrix analytic = p->grad;
    for (Eigen::Index k = 0; k < p->data.size(); ++k) {
      const Real saved = p->data.data()[k];
      p->data.data()[k] = saved + epsilon;
      const Real up = eval();
      p->data.data()[k] = saved - epsilon;
      const Real down = eval();
      p->data.data()[k] = saved;
      const Real numeric = (up - down) / (2.0 * epsilon);
      const Real a = analytic.data()[k];
      const Real err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (report.worst_index < 0 || err > report.max_rel_error) {
        report = {err, p->name, k, a, numeric};
      }
    }
  }
  return report;
}

}  // namespace marl::ad
