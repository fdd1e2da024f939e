#pragma once

#include <string>
#include <utility>
#include <vector>

#include "marl/agents/config.hpp"
#include "marl/core/random.hpp"

namespace marl::harness {

using Range = std::pair<double, double>;

// Exponent ranges are base 10; noise scale is linear.
struct SearchSpace {
  Range log_actor_lr{-8.0, -3.0};
  Range log_critic_ratio{-2.0, 2.0};
  Range log_tau{-3.0, -1.0};
  Range log_lambda1{-3.0, 0.0};
  Range log_lambda2{-3.0, 0.0};
  Range log_lambda3{-1.0, 1.0};
  Range noise_scale{0.3, 1.8};
};

// Draws only the fields the variant reads; the rest keep their base values.
agents::TrainConfig sample_config(const SearchSpace& space, agents::Variant variant, const agents::TrainConfig& base,
                                  Rng& rng);

struct Job {
  int config_id = 0;
  int seed_index = 0;
  agents::TrainConfig cfg;
  std::string dir;
};

// Trains every job and writes its artifacts to job.dir. With an empty worker command the
// jobs run in this process; otherwise each job is a child process
//   <worker...> --config <dir>/config.json --out <dir>
// with at most `workers` alive at once.
void run_jobs(const std::vector<Job>& jobs, int workers, const std::vector<std::string>& worker);

struct JobResult {
  int config_id = 0;
  int seed_index = 0;
  double score = 0.0;
};

struct RankedConfig {
  int config_id = 0;
  agents::TrainConfig cfg;
  std::vector<double> seed_scores;
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Best mean first; ties go to the lower config id.
std::vector<RankedConfig> rank_results(std::vector<JobResult> results, const std::vector<agents::TrainConfig>& configs);

struct SearchOptions {
  agents::TrainConfig base;
  SearchSpace space;
  int n_configs = 50;
  int n_seeds = 3;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::vector<std::string> worker;
  std::string out_dir;
};

// Writes search_results.csv, search_summary.csv and best_config.json under out_dir.
std::vector<RankedConfig> search(const SearchOptions& opt);

std::string search_results_csv(const std::vector<RankedConfig>& ranked, const std::string& hash);
// Quartiles of the per-config scores and the best point; one row.
std::string search_summary_csv(const std::vector<RankedConfig>& ranked, const agents::TrainConfig& base,
                               const std::string& hash);

double quantile(std::vector<double> v, double q);

}  // namespace marl::harness
