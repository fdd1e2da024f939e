#include "marl/agents/noise.hpp"

#include <algorithm>
#include <cmath>

namespace marl::agents {

OUNoise::OUNoise(int size, double theta, double sigma, double mu, double dt)
    : x_(static_cast<std::size_t>(size), mu), theta_(theta), sigma_(sigma), mu_(mu), dt_(dt) {}

void OUNoise::reset() { std::fill(x_.begin(), x_.end(), mu_); }

const std::vector<double>& OUNoise::sample(Rng& rng) {
  for (double& x : x_) x += theta_ * (mu_ - x) * dt_ + sigma_ * std::sqrt(dt_) * standard_normal(rng);
  return x_;
}

double noise_scale_at(int episode, int total_episodes, double eta) {
  const int half = total_episodes / 2;
  if (episode < half) return eta;
  const int span = total_episodes - 1 - half;
  if (span <= 0) return 0.0;
  return eta * std::max(0.0, 1.0 - static_cast<double>(episode - half) / span);
}

}  // namespace marl::agents
