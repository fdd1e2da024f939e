#pragma once

#include <string>
#include <vector>

namespace marl::analysis {

using MaskSequence = std::vector<int>;

// Shannon entropy (nats) of the empirical distribution of mask ids in [0, k).
double mask_entropy(const MaskSequence& ids, int k);
// Fraction of timesteps on which the two sequences agree.
double hamming_proximity(const MaskSequence& a, const MaskSequence& b);
// Max of hamming_proximity over all k! relabelings of b.
double best_equivalence_proximity(const MaskSequence& a, const MaskSequence& b, int k);
// Mean over unordered agent pairs.
double mean_pairwise_proximity(const std::vector<MaskSequence>& agents, bool best_equivalence, int k);
// |mean(a) - mean(b)|
double perf_difference(const std::vector<double>& returns_a, const std::vector<double>& returns_b);
// Trailing moving average; entry t averages the last min(window, t + 1) values.
std::vector<double> moving_average(const std::vector<double>& series, int window);

double mean(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);

}  // namespace marl::analysis
