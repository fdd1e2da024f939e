#pragma once

#include <vector>

#include "marl/core/random.hpp"

namespace marl::agents {

// x <- x + theta (mu - x) dt + sigma sqrt(dt) N(0, 1), per component.
class OUNoise {
 public:
  OUNoise(int size, double theta = 0.15, double sigma = 0.2, double mu = 0.0, double dt = 1.0);

  void reset();
  const std::vector<double>& sample(Rng& rng);
  const std::vector<double>& state() const { return x_; }

 private:
  std::vector<double> x_;
  double theta_, sigma_, mu_, dt_;
};

// eta for the first half of training, then linear decay reaching 0 at the last episode.
double noise_scale_at(int episode, int total_episodes, double eta);

}  // namespace marl::agents
