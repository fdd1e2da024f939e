#pragma once

#include <string>

#include "marl/agents/config.hpp"

namespace marl::harness {

enum class Scale { Paper, Desk };

Scale parse_scale(const std::string& name);

// Tuned hyper-parameters per env and variant. Paper scale trains for 30,000 episodes, desk scale
// for 4,000. Everything else keeps the TrainConfig defaults.
agents::TrainConfig preset_config(const std::string& env, agents::Variant variant, Scale scale = Scale::Desk);

}  // namespace marl::harness
