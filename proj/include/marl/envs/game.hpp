#pragma once

#include <memory>
#include <string>
#include <vector>

#include "marl/core/random.hpp"

namespace marl::env {

using Vec = std::vector<double>;
using JointObs = std::vector<Vec>;
using JointAction = std::vector<Vec>;

struct StepResult {
  JointObs obs;
  std::vector<double> rewards;
  bool done = false;      // episode over (termination or step budget)
  bool terminal = false;  // genuine termination; value bootstrap is cut
};

struct ActionSpec {
  bool discrete = false;
  int size = 0;  // action width (continuous) or number of choices (discrete)
};

class MarkovGame {
 public:
  virtual ~MarkovGame() = default;

  virtual std::string name() const = 0;
  virtual int n_agents() const = 0;
  virtual std::vector<int> obs_dims() const = 0;
  virtual ActionSpec action_spec(int agent) const = 0;
  virtual int max_steps() const = 0;

  virtual JointObs reset(Rng& rng) = 0;
  virtual StepResult step(const JointAction& actions, Rng& rng) = 0;
};

enum class Task { Spread, Bounce, Compromise, Chase, Chain };

Task parse_task(const std::string& name);
std::string task_name(Task task);

}  // namespace marl::env
