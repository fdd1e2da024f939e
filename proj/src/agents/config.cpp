#include "marl/agents/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "marl/core/random.hpp"

namespace marl::agents {

namespace {
const std::pair<Variant, const char*> kVariants[] = {
    {Variant::DDPG, "ddpg"},         {Variant::MADDPG, "maddpg"},
    {Variant::Sharing, "sharing"},   {Variant::TeamReg, "teamreg"},
    {Variant::AgentModelling, "agent-modelling"}, {Variant::CoachReg, "coachreg"},
    {Variant::PolicyMask, "policy-mask"},
};
}  // namespace

Variant parse_variant(const std::string& name) {
  for (const auto& [v, n] : kVariants)
    if (name == n) return v;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

std::string variant_name(Variant v) {
  for (const auto& [k, n] : kVariants)
    if (k == v) return n;
  return "?";
}

bool uses_masks(Variant v) { return v == Variant::CoachReg || v == Variant::PolicyMask; }
bool uses_team_spirit(Variant v) { return v == Variant::TeamReg || v == Variant::AgentModelling; }
bool uses_coach(Variant v) { return v == Variant::CoachReg; }

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("TrainConfig: " + m); };
  if (n_agents < 1) fail("n_agents must be positive");
  if (episodes < 0 || max_steps <= 0) fail("episodes/max_steps");
  if (actor_lr < 0 || critic_lr_ratio < 0) fail("learning rates must be non-negative");
  if (tau < 0 || tau > 1) fail("tau outside [0,1]");
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) fail("lambdas must be non-negative");
  if (noise_scale < 0) fail("noise_scale");
  if (gamma < 0 || gamma > 1) fail("gamma outside [0,1]");
  if (batch_size <= 0 || buffer_capacity < batch_size) fail("batch/buffer sizes");
  if (steps_per_update <= 0 || eval_every <= 0 || eval_episodes <= 0 || final_eval_episodes <= 0)
    fail("schedule counts must be positive");
  if (hidden <= 0 || mask_k <= 0 || hidden % mask_k != 0) fail("hidden width must be a multiple of K");
  if (variant == Variant::AgentModelling && lambda2 != 0) fail("agent-modelling requires lambda2 = 0");
  if (variant == Variant::PolicyMask && (lambda1 != 0 || lambda2 != 0 || lambda3 != 0 || !coach_frozen))
    fail("policy-mask requires zero lambdas and a frozen coach");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["env"] = c.env;
  j["n_agents"] = c.n_agents;
  j["variant"] = variant_name(c.variant);
  j["seed"] = c.seed;
  j["episodes"] = c.episodes;
  j["max_steps"] = c.max_steps;
  j["actor_lr"] = c.actor_lr;
  j["critic_lr_ratio"] = c.critic_lr_ratio;
  j["tau"] = c.tau;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["lambda3"] = c.lambda3;
  j["coach_frozen"] = c.coach_frozen;
  j["noise_scale"] = c.noise_scale;
  j["ou_theta"] = c.ou_theta;
  j["ou_sigma"] = c.ou_sigma;
  j["gamma"] = c.gamma;
  j["batch_size"] = c.batch_size;
  j["buffer_capacity"] = c.buffer_capacity;
  j["steps_per_update"] = c.steps_per_update;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["final_eval_episodes"] = c.final_eval_episodes;
  j["grad_clip"] = c.grad_clip;
  j["hidden"] = c.hidden;
  j["layer_norm"] = c.layer_norm;
  j["mask_k"] = c.mask_k;
  j["gumbel_temperature"] = c.gumbel_temperature;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("env", c.env);
  get("n_agents", c.n_agents);
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  get("seed", c.seed);
  get("episodes", c.episodes);
  get("max_steps", c.max_steps);
  get("actor_lr", c.actor_lr);
  get("critic_lr_ratio", c.critic_lr_ratio);
  get("tau", c.tau);
  get("lambda1", c.lambda1);
  get("lambda2", c.lambda2);
  get("lambda3", c.lambda3);
  get("coach_frozen", c.coach_frozen);
  get("noise_scale", c.noise_scale);
  get("ou_theta", c.ou_theta);
  get("ou_sigma", c.ou_sigma);
  get("gamma", c.gamma);
  get("batch_size", c.batch_size);
  get("buffer_capacity", c.buffer_capacity);
  get("steps_per_update", c.steps_per_update);
  get("eval_every", c.eval_every);
  get("eval_episodes", c.eval_episodes);
  get("final_eval_episodes", c.final_eval_episodes);
  get("grad_clip", c.grad_clip);
  get("hidden", c.hidden);
  get("layer_norm", c.layer_norm);
  get("mask_k", c.mask_k);
  get("gumbel_temperature", c.gumbel_temperature);
  for (const auto& [key, _] : j.items())
    if (!to_json(c).contains(key)) throw std::invalid_argument("TrainConfig: unknown key '" + key + "'");
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return config_from_json(nlohmann::json::parse(in));
}

void save_config(const TrainConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config " + path);
  out << to_json(c).dump(2) << "\n";
}

std::uint64_t config_hash(const TrainConfig& c) { return fnv1a64(to_json(c).dump()); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace marl::agents
