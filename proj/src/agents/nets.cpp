#include "marl/agents/nets.hpp"

#include <stdexcept>

#include "marl/autograd/ops.hpp"

namespace marl::agents {

Var ActorNet::act(Graph& g, Var obs, std::optional<Var> mask, bool track, Var* features) {
  Var h = policy.trunk(g, obs, mask, track);
  if (features != nullptr) *features = h;
  return policy.head(g, h, track);
}

Var ActorNet::predict(Graph& g, int head, Var features, bool track) {
  return ad::tanh(heads.at(static_cast<std::size_t>(head)).forward(g, features, track));
}

Var ActorNet::mask_logits(Graph& g, Var obs, bool track) {
  if (!mask_layer) throw std::logic_error("ActorNet: no mask layer");
  return mask_layer->forward(g, obs, track);
}

std::vector<Param*> ActorNet::core_params() {
  std::vector<Param*> out = policy.params();
  if (mask_layer)
    for (Param* p : mask_layer->params()) out.push_back(p);
  return out;
}

std::vector<Param*> ActorNet::head_params() {
  std::vector<Param*> out;
  for (auto& h : heads)
    for (Param* p : h.params()) out.push_back(p);
  return out;
}

std::vector<Param*> ActorNet::params() {
  std::vector<Param*> out = core_params();
  for (Param* p : head_params()) out.push_back(p);
  return out;
}

void prefix_names(std::vector<Param*> params, const std::string& prefix) {
  for (Param* p : params) p->name = prefix + p->name;
}

}  // namespace marl::agents
