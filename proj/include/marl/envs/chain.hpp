#pragma once

#include <utility>

#include "marl/envs/game.hpp"

namespace marl::env {

// a1' = a1, a2' = a1*a2 + (1-a1)(1-a2): agent 2 chooses agreement (1) or disagreement (0).
std::pair<int, int> coordination_map(int a1, int a2);

struct ChainState {
  int position = 0;
  int steps = 0;
};

struct ChainOutcome {
  ChainState state;
  double reward = -1.0;  // same for both agents
  bool done = false;
  bool terminal = false;
};

// Two agents on positions 0..L, starting at 0; action 0 pushes right, 1 pushes left.
// The cart moves only when the (possibly mapped) actions agree. Position L is terminal.
class ChainGame final : public MarkovGame {
 public:
  ChainGame(int length, bool coordination_module, int step_budget);

  int length() const { return length_; }
  bool coordinated() const { return coordinated_; }
  const ChainState& state() const { return state_; }

  ChainOutcome transition(const ChainState& s, int a1, int a2) const;
  ChainOutcome step_bits(int a1, int a2);
  void reset() { state_ = ChainState{}; }

  std::string name() const override { return "chain"; }
  int n_agents() const override { return 2; }
  std::vector<int> obs_dims() const override { return {1, 1}; }
  ActionSpec action_spec(int) const override { return {true, 2}; }
  int max_steps() const override { return budget_; }
  JointObs reset(Rng& rng) override;
  StepResult step(const JointAction& actions, Rng& rng) override;

 private:
  int length_;
  bool coordinated_;
  int budget_;
  ChainState state_;
};

}  // namespace marl::env
