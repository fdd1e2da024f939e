#include "marl/agents/replay.hpp"

#include <numeric>
#include <stdexcept>

namespace marl::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::vector<int> obs_dims, std::vector<int> action_dims)
    : capacity_(capacity), obs_dims_(std::move(obs_dims)), action_dims_(std::move(action_dims)) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  if (obs_dims_.size() != action_dims_.size()) throw std::invalid_argument("ReplayBuffer: agent count mismatch");
  obs_width_ = static_cast<std::size_t>(std::accumulate(obs_dims_.begin(), obs_dims_.end(), 0));
  action_width_ = static_cast<std::size_t>(std::accumulate(action_dims_.begin(), action_dims_.end(), 0));
  // obs | actions | rewards | next obs | terminal
  row_width_ = 2 * obs_width_ + action_width_ + obs_dims_.size() + 1;
}

void ReplayBuffer::add(const Transition& t) {
  const std::size_t n = obs_dims_.size();
  if (t.obs.size() != n || t.actions.size() != n || t.rewards.size() != n || t.next_obs.size() != n)
    throw std::invalid_argument("ReplayBuffer: transition agent count mismatch");
  if (size_ < capacity_) rows_.resize((size_ + 1) * row_width_);
  double* row = rows_.data() + cursor_ * row_width_;
  auto put = [&](const std::vector<double>& v, int width) {
    if (static_cast<int>(v.size()) != width) throw std::invalid_argument("ReplayBuffer: vector width mismatch");
    row = std::copy(v.begin(), v.end(), row);
  };
  for (std::size_t i = 0; i < n; ++i) put(t.obs[i], obs_dims_[i]);
  for (std::size_t i = 0; i < n; ++i) put(t.actions[i], action_dims_[i]);
  for (std::size_t i = 0; i < n; ++i) *row++ = t.rewards[i];
  for (std::size_t i = 0; i < n; ++i) put(t.next_obs[i], obs_dims_[i]);
  *row = t.terminal ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer::at");
  const double* row = rows_.data() + i * row_width_;
  Transition t;
  auto take = [&](int width) {
    std::vector<double> v(row, row + width);
    row += width;
    return v;
  };
  for (int d : obs_dims_) t.obs.push_back(take(d));
  for (int d : action_dims_) t.actions.push_back(take(d));
  for (std::size_t k = 0; k < obs_dims_.size(); ++k) t.rewards.push_back(*row++);
  for (int d : obs_dims_) t.next_obs.push_back(take(d));
  t.terminal = *row != 0.0;
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& k : idx) k = pick(rng);
  return idx;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& idx) const {
  const auto rows = static_cast<Eigen::Index>(idx.size());
  const std::size_t n = obs_dims_.size();
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.obs.emplace_back(rows, obs_dims_[i]);
    b.actions.emplace_back(rows, action_dims_[i]);
    b.rewards.emplace_back(rows, 1);
    b.next_obs.emplace_back(rows, obs_dims_[i]);
  }
  b.not_terminal.resize(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t k = idx[static_cast<std::size_t>(r)];
    if (k >= size_) throw std::out_of_range("ReplayBuffer::gather");
    const double* p = rows_.data() + k * row_width_;
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < obs_dims_[i]; ++c) b.obs[i](r, c) = *p++;
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < action_dims_[i]; ++c) b.actions[i](r, c) = *p++;
    for (std::size_t i = 0; i < n; ++i) b.rewards[i](r, 0) = *p++;
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < obs_dims_[i]; ++c) b.next_obs[i](r, c) = *p++;
    b.not_terminal(r, 0) = *p != 0.0 ? 0.0 : 1.0;
  }
  return b;
}

}  // namespace marl::agents
