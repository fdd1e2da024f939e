#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace marl::agents {

enum class Variant { DDPG, MADDPG, Sharing, TeamReg, AgentModelling, CoachReg, PolicyMask };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
bool uses_masks(Variant v);
bool uses_team_spirit(Variant v);  // lambda1 / lambda2 are read
bool uses_coach(Variant v);        // lambda3 is read, coach is trained

struct TrainConfig {
  std::string env = "spread";
  int n_agents = 3;
  Variant variant = Variant::MADDPG;
  std::uint64_t seed = 0;
  int episodes = 4000;
  int max_steps = 100;

  double actor_lr = 1e-4;         // alpha_theta
  double critic_lr_ratio = 10.0;  // omega_phi, critic lr = ratio * actor lr
  double tau = 0.01;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  bool coach_frozen = false;

  double noise_scale = 1.0;  // eta
  double ou_theta = 0.15;
  double ou_sigma = 0.2;

  double gamma = 0.95;
  int batch_size = 1024;
  int buffer_capacity = 1000000;
  int steps_per_update = 100;
  int eval_every = 100;  // learning steps
  int eval_episodes = 10;
  int final_eval_episodes = 100;
  double grad_clip = 0.5;

  int hidden = 128;
  bool layer_norm = true;
  int mask_k = 4;
  double gumbel_temperature = 1.0;

  double critic_lr() const { return critic_lr_ratio * actor_lr; }
  double coach_lr() const { return coach_frozen ? 0.0 : actor_lr; }
  int mask_c() const { return hidden / mask_k; }
  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::string& path);
void save_config(const TrainConfig& c, const std::string& path);
// FNV-1a of the canonical JSON text.
std::uint64_t config_hash(const TrainConfig& c);
std::string hex64(std::uint64_t v);

}  // namespace marl::agents
