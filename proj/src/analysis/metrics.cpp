#include "marl/analysis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace marl::analysis {

double mask_entropy(const MaskSequence& ids, int k) {
  if (ids.empty()) throw std::invalid_argument("mask_entropy: empty sequence");
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int id : ids) {
    if (id < 0 || id >= k) throw std::out_of_range("mask_entropy: id outside [0, k)");
    counts[static_cast<std::size_t>(id)] += 1.0;
  }
  double h = 0.0;
  for (double c : counts)
    if (c > 0) {
      const double p = c / static_cast<double>(ids.size());
      h -= p * std::log(p);
    }
  return h;
}

double hamming_proximity(const MaskSequence& a, const MaskSequence& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_proximity: length mismatch");
  if (a.empty()) throw std::invalid_argument("hamming_proximity: empty sequences");
  std::size_t same = 0;
  for (std::size_t t = 0; t < a.size(); ++t) same += a[t] == b[t];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double best_equivalence_proximity(const MaskSequence& a, const MaskSequence& b, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  MaskSequence relabeled(b.size());
  double best = 0.0;
  do {
    for (std::size_t t = 0; t < b.size(); ++t) {
      if (b[t] < 0 || b[t] >= k) throw std::out_of_range("best_equivalence_proximity: id outside [0, k)");
      relabeled[t] = perm[static_cast<std::size_t>(b[t])];
    }
    best = std::max(best, hamming_proximity(a, relabeled));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double mean_pairwise_proximity(const std::vector<MaskSequence>& agents, bool best_equivalence, int k) {
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < agents.size(); ++i)
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      total += best_equivalence ? best_equivalence_proximity(agents[i], agents[j], k)
                                : hamming_proximity(agents[i], agents[j]);
      ++pairs;
    }
  if (pairs == 0) throw std::invalid_argument("mean_pairwise_proximity: need two agents");
  return total / pairs;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double perf_difference(const std::vector<double>& returns_a, const std::vector<double>& returns_b) {
  return std::abs(mean(returns_a) - mean(returns_b));
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t from = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - static_cast<std::size_t>(window) : 0;
    double sum = 0.0;
    for (std::size_t s = from; s <= t; ++s) sum += series[s];
    out[t] = sum / static_cast<double>(t + 1 - from);
  }
  return out;
}

}  // namespace marl::analysis
