#include "marl/envs/chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace marl::env {

std::pair<int, int> coordination_map(int a1, int a2) {
  if ((a1 != 0 && a1 != 1) || (a2 != 0 && a2 != 1)) throw std::invalid_argument("coordination_map: bits only");
  return {a1, a1 * a2 + (1 - a1) * (1 - a2)};
}

ChainGame::ChainGame(int length, bool coordination_module, int step_budget)
    : length_(length), coordinated_(coordination_module), budget_(step_budget) {
  if (length_ <= 0 || budget_ <= 0) throw std::invalid_argument("ChainGame: length and budget must be positive");
}

ChainOutcome ChainGame::transition(const ChainState& s, int a1, int a2) const {
  if ((a1 != 0 && a1 != 1) || (a2 != 0 && a2 != 1)) throw std::invalid_argument("ChainGame: bits only");
  if (coordinated_) std::tie(a1, a2) = coordination_map(a1, a2);
  ChainOutcome out;
  out.state = s;
  ++out.state.steps;
  if (a1 == a2) out.state.position = std::clamp(s.position + (a1 == 0 ? 1 : -1), 0, length_);
  out.terminal = out.state.position == length_;
  out.done = out.terminal || out.state.steps >= budget_;
  return out;
}

ChainOutcome ChainGame::step_bits(int a1, int a2) {
  ChainOutcome out = transition(state_, a1, a2);
  state_ = out.state;
  return out;
}

JointObs ChainGame::reset(Rng&) {
  reset();
  const double p = state_.position;
  return {{p}, {p}};
}

StepResult ChainGame::step(const JointAction& actions, Rng&) {
  if (actions.size() != 2 || actions[0].size() != 1 || actions[1].size() != 1)
    throw std::invalid_argument("ChainGame: expects one bit per agent");
  ChainOutcome o = step_bits(static_cast<int>(actions[0][0]), static_cast<int>(actions[1][0]));
  const double p = o.state.position;
  return {{{p}, {p}}, {o.reward, o.reward}, o.done, o.terminal};
}

}  // namespace marl::env
