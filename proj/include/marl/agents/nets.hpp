#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marl/autograd/nn.hpp"

namespace marl::agents {

using ad::Graph;
using ad::Matrix;
using ad::Param;
using ad::Var;

// Policy network, optional teammate-prediction heads on the policy trunk, optional
// mask layer (obs -> K logits) gating the first hidden layer.
struct ActorNet {
  ad::Mlp policy;
  std::vector<ad::Linear> heads;
  std::optional<ad::Linear> mask_layer;

  Var act(Graph& g, Var obs, std::optional<Var> mask, bool track, Var* features = nullptr);
  Var predict(Graph& g, int head, Var features, bool track);
  Var mask_logits(Graph& g, Var obs, bool track);

  // policy + mask layer (what target copies track)
  std::vector<Param*> core_params();
  std::vector<Param*> head_params();
  std::vector<Param*> params();
};

struct CriticNet {
  ad::Mlp q;
};

struct CoachNet {
  ad::Mlp net;  // joint obs -> K logits
};

void prefix_names(std::vector<Param*> params, const std::string& prefix);

}  // namespace marl::agents
