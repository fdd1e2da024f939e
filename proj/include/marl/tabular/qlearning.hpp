#pragma once

#include <array>
#include <string>
#include <vector>

#include "marl/core/random.hpp"
#include "marl/envs/chain.hpp"

namespace marl::tab {

// Q[s][a] for states 0..L and actions {0, 1}, zero-initialised.
class QTable {
 public:
  explicit QTable(int n_states) : q_(static_cast<std::size_t>(n_states), {0.0, 0.0}) {}

  std::array<double, 2>& operator[](int s) { return q_.at(static_cast<std::size_t>(s)); }
  const std::array<double, 2>& operator[](int s) const { return q_.at(static_cast<std::size_t>(s)); }
  int n_states() const { return static_cast<int>(q_.size()); }
  // Greedy action, ties to 0.
  int greedy(int s) const { return (*this)[s][1] > (*this)[s][0] ? 1 : 0; }

 private:
  std::vector<std::array<double, 2>> q_;
};

// P(a) proportional to exp(q[a] / temperature).
double boltzmann_probability(const std::array<double, 2>& q, int action, double temperature = 1.0);
int boltzmann_sample(const std::array<double, 2>& q, double temperature, Rng& rng);

// Q[s,a] += lr (r + gamma max Q[s'] - Q[s,a]); a terminal s' bootstraps 0.
void q_update(QTable& q, int s, int a, double r, int s_next, bool terminal, double lr = 0.05, double gamma = 0.99);

struct ToyConfig {
  int length = 5;
  int episodes = 200;  // learning episodes per seed
  int n_seeds = 20;
  int eval_episodes = 10;
  int step_cap_factor = 10;  // episode cap = factor * L
  double lr = 0.05;
  double gamma = 0.99;
  double temperature = 1.0;
  std::uint64_t master_seed = 0;
};

struct ToyCurves {
  bool coordinated = false;
  std::vector<std::vector<double>> per_seed;  // [seed][episode] mean greedy return per agent
  std::vector<double> mean;
  std::vector<double> stderr_;
};

// Greedy rollout return of one agent (both receive the same reward).
double greedy_return(const env::ChainGame& game, const QTable& q1, const QTable& q2);

ToyCurves run_toy_experiment(const ToyConfig& cfg, bool coordinated);

// Return at the 90% mark between the step-cap return (-cap) and the optimum (-L).
double ninety_percent_threshold(const ToyConfig& cfg);
// First episode (1-based) whose greedy return reaches `threshold`; episodes + 1 if never.
int hitting_episode(const std::vector<double>& curve, double threshold);
double mean_hitting_episode(const ToyCurves& curves, double threshold);

}  // namespace marl::tab
