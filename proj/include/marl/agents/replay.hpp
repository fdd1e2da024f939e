#pragma once

#include <vector>

#include "marl/autograd/graph.hpp"
#include "marl/core/random.hpp"
#include "marl/envs/game.hpp"

namespace marl::agents {

using ad::Matrix;

struct Transition {
  env::JointObs obs;
  env::JointAction actions;
  std::vector<double> rewards;
  env::JointObs next_obs;
  bool terminal = false;
};

// Batched view: one matrix per agent, rows = samples.
struct Batch {
  std::vector<Matrix> obs;
  std::vector<Matrix> actions;
  std::vector<Matrix> rewards;  // B x 1
  std::vector<Matrix> next_obs;
  Matrix not_terminal;          // B x 1, 0 where the episode truly ended
  Eigen::Index size() const { return not_terminal.rows(); }
};

// Ring buffer of flat rows; the oldest transition is overwritten once full. Storage
// grows on demand up to the capacity. Sampling is uniform with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::vector<int> obs_dims, std::vector<int> action_dims);

  void add(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  Transition at(std::size_t i) const;

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  Batch gather(const std::vector<std::size_t>& idx) const;
  Batch sample(std::size_t n, Rng& rng) const { return gather(sample_indices(n, rng)); }

 private:
  std::size_t capacity_;
  std::vector<int> obs_dims_, action_dims_;
  std::size_t obs_width_ = 0, action_width_ = 0, row_width_ = 0;
  std::size_t size_ = 0, cursor_ = 0;
  std::vector<double> rows_;
};

}  // namespace marl::agents
