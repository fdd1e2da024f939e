#include "marl/tabular/qlearning.hpp"

#include <cmath>
#include <stdexcept>

namespace marl::tab {

double boltzmann_probability(const std::array<double, 2>& q, int action, double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("boltzmann: temperature must be positive");
  const double m = std::max(q[0], q[1]);
  const double e0 = std::exp((q[0] - m) / temperature);
  const double e1 = std::exp((q[1] - m) / temperature);
  return (action == 0 ? e0 : e1) / (e0 + e1);
}

int boltzmann_sample(const std::array<double, 2>& q, double temperature, Rng& rng) {
  return uniform(rng, 0.0, 1.0) < boltzmann_probability(q, 0, temperature) ? 0 : 1;
}

void q_update(QTable& q, int s, int a, double r, int s_next, bool terminal, double lr, double gamma) {
  const double bootstrap = terminal ? 0.0 : std::max(q[s_next][0], q[s_next][1]);
  q[s][a] += lr * (r + gamma * bootstrap - q[s][a]);
}

double greedy_return(const env::ChainGame& game, const QTable& q1, const QTable& q2) {
  env::ChainState s{};
  double total = 0.0;
  while (true) {
    env::ChainOutcome o = game.transition(s, q1.greedy(s.position), q2.greedy(s.position));
    total += o.reward;
    s = o.state;
    if (o.done) break;
  }
  return total;
}

ToyCurves run_toy_experiment(const ToyConfig& cfg, bool coordinated) {
  ToyCurves out;
  out.coordinated = coordinated;
  const int cap = cfg.step_cap_factor * cfg.length;
  for (int seed = 0; seed < cfg.n_seeds; ++seed) {
    Rng rng = make_rng(cfg.master_seed, "toy.seed" + std::to_string(seed));
    env::ChainGame game(cfg.length, coordinated, cap);
    QTable q1(cfg.length + 1), q2(cfg.length + 1);
    std::vector<double> curve;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
      game.reset();
      while (true) {
        const int s = game.state().position;
        const int a1 = boltzmann_sample(q1[s], cfg.temperature, rng);
        const int a2 = boltzmann_sample(q2[s], cfg.temperature, rng);
        env::ChainOutcome o = game.step_bits(a1, a2);
        q_update(q1, s, a1, o.reward, o.state.position, o.terminal, cfg.lr, cfg.gamma);
        q_update(q2, s, a2, o.reward, o.state.position, o.terminal, cfg.lr, cfg.gamma);
        if (o.done) break;
      }
      double eval = 0.0;
      for (int k = 0; k < cfg.eval_episodes; ++k) eval += greedy_return(game, q1, q2);
      curve.push_back(eval / cfg.eval_episodes);
    }
    out.per_seed.push_back(std::move(curve));
  }
  const auto n = static_cast<double>(cfg.n_seeds);
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    double s = 0.0, ss = 0.0;
    for (const auto& c : out.per_seed) {
      s += c[static_cast<std::size_t>(ep)];
      ss += c[static_cast<std::size_t>(ep)] * c[static_cast<std::size_t>(ep)];
    }
    const double mu = s / n;
    const double var = n > 1 ? std::max(0.0, (ss - n * mu * mu) / (n - 1)) : 0.0;
    out.mean.push_back(mu);
    out.stderr_.push_back(std::sqrt(var / n));
  }
  return out;
}

double ninety_percent_threshold(const ToyConfig& cfg) {
  const double optimal = -cfg.length;
  const double worst = -static_cast<double>(cfg.step_cap_factor * cfg.length);
  return worst + 0.9 * (optimal - worst);
}

int hitting_episode(const std::vector<double>& curve, double threshold) {
  for (std::size_t k = 0; k < curve.size(); ++k)
    if (curve[k] >= threshold) return static_cast<int>(k) + 1;
  return static_cast<int>(curve.size()) + 1;
}

double mean_hitting_episode(const ToyCurves& curves, double threshold) {
  double s = 0.0;
  for (const auto& c : curves.per_seed) s += hitting_episode(c, threshold);
  return s / static_cast<double>(curves.per_seed.size());
}

}  // namespace marl::tab
