#include "marl/harness/presets.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace marl::harness {

using agents::TrainConfig;
using agents::Variant;

namespace {

struct Hp {
  double actor_lr, ratio, tau, l1, l2, l3, eta;
};

const std::map<std::pair<std::string, Variant>, Hp>& table() {
  static const std::map<std::pair<std::string, Variant>, Hp> t{
      {{"spread", Variant::DDPG}, {5.3e-5, 53, 0.05, 0, 0, 0, 1.0}},
      {{"spread", Variant::MADDPG}, {2.1e-5, 79, 0.083, 0, 0, 0, 0.5}},
      {{"spread", Variant::Sharing}, {9.0e-4, 0.71, 0.076, 0, 0, 0, 0.7}},
      {{"spread", Variant::TeamReg}, {2.5e-5, 42, 0.098, 0.054, 0.29, 0, 1.2}},
      {{"spread", Variant::CoachReg}, {1.2e-5, 82, 0.0077, 0.13, 0.24, 8.4, 1.6}},
      {{"spread", Variant::AgentModelling}, {1.3e-5, 85, 0.055, 0.06, 0, 0, 1.0}},
      {{"spread", Variant::PolicyMask}, {6.8e-5, 9.4, 0.02, 0, 0, 0, 1.1}},

      {{"bounce", Variant::DDPG}, {8.1e-4, 2.4, 0.089, 0, 0, 0, 1.2}},
      {{"bounce", Variant::MADDPG}, {3.8e-5, 87, 0.016, 0, 0, 0, 0.9}},
      {{"bounce", Variant::Sharing}, {1.2e-4, 0.47, 0.06, 0, 0, 0, 1.2}},
      {{"bounce", Variant::TeamReg}, {1.3e-5, 85, 0.055, 0.06, 0.0026, 0, 1.0}},
      {{"bounce", Variant::CoachReg}, {6.8e-5, 9.4, 0.02, 0.0066, 0.23, 0.34, 1.1}},
      {{"bounce", Variant::AgentModelling}, {1.3e-5, 85, 0.055, 0.06, 0, 0, 1.0}},
      {{"bounce", Variant::PolicyMask}, {2.5e-4, 0.52, 0.0077, 0, 0, 0, 1.3}},

      {{"chase", Variant::DDPG}, {4.5e-4, 32, 0.031, 0, 0, 0, 0.6}},
      {{"chase", Variant::MADDPG}, {2.0e-4, 64, 0.021, 0, 0, 0, 1.0}},
      {{"chase", Variant::Sharing}, {9.7e-4, 0.79, 0.032, 0, 0, 0, 1.5}},
      {{"chase", Variant::TeamReg}, {1.3e-5, 85, 0.055, 0.06, 0.0026, 0, 1.0}},
      {{"chase", Variant::CoachReg}, {1.8e-4, 90, 0.011, 0.0069, 0.86, 0.76, 1.1}},
      {{"chase", Variant::AgentModelling}, {2.5e-5, 42, 0.098, 0.054, 0, 0, 1.2}},
      {{"chase", Variant::PolicyMask}, {6.8e-5, 9.4, 0.02, 0, 0, 0, 1.1}},

      {{"compromise", Variant::DDPG}, {6.1e-5, 1.7, 0.065, 0, 0, 0, 1.1}},
      {{"compromise", Variant::MADDPG}, {3.1e-4, 0.94, 0.045, 0, 0, 0, 0.7}},
      {{"compromise", Variant::Sharing}, {6.2e-4, 0.58, 0.007, 0, 0, 0, 1.3}},
      {{"compromise", Variant::TeamReg}, {1.5e-5, 90, 0.02, 0.0013, 0.56, 0, 1.6}},
      {{"compromise", Variant::CoachReg}, {3.4e-4, 29, 0.0037, 0.65, 0.5, 1.3, 1.6}},
      {{"compromise", Variant::AgentModelling}, {1.2e-4, 0.71, 0.0051, 0.0075, 0, 0, 1.8}},
      {{"compromise", Variant::PolicyMask}, {2.5e-4, 0.52, 0.0077, 0, 0, 0, 1.3}},
  };
  return t;
}

}  // namespace

Scale parse_scale(const std::string& name) {
  if (name == "paper") return Scale::Paper;
  if (name == "desk") return Scale::Desk;
  throw std::invalid_argument("unknown scale: " + name + " (paper, desk)");
}

TrainConfig preset_config(const std::string& env, Variant variant, Scale scale) {
  auto it = table().find({env, variant});
  if (it == table().end()) throw std::invalid_argument("no preset for env " + env);
  const Hp& h = it->second;
  TrainConfig c;
  c.env = env;
  c.n_agents = env == "spread" ? 3 : 2;
  c.variant = variant;
  c.episodes = scale == Scale::Paper ? 30000 : 4000;
  c.actor_lr = h.actor_lr;
  c.critic_lr_ratio = h.ratio;
  c.tau = h.tau;
  c.lambda1 = h.l1;
  c.lambda2 = h.l2;
  c.lambda3 = h.l3;
  c.noise_scale = h.eta;
  c.coach_frozen = variant == Variant::PolicyMask;
  c.validate();
  return c;
}

}  // namespace marl::harness
