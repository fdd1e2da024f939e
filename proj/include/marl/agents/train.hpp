#pragma once

#include <functional>
#include <string>
#include <vector>

#include "marl/agents/learner.hpp"
#include "marl/envs/game.hpp"

namespace marl::agents {

struct EvalResult {
  std::vector<double> per_agent;  // mean episode return of each agent
  double mean = 0.0;              // mean over agents
};

// Greedy rollouts: no exploration noise, argmax masks unless mask_rng is given.
EvalResult evaluate(Learner& learner, env::MarkovGame& game, int episodes, Rng& env_rng, int max_steps,
                    Rng* mask_rng = nullptr);

// One evaluation snapshot. Losses are averaged over the updates since the previous row.
struct LogRow {
  int episode = 0;
  long learning_step = 0;
  std::vector<double> eval_return;
  double mean_return = 0.0;
  std::vector<double> critic_loss;
  double team_spirit = 0.0;
  double mask_kl = 0.0;
  double noise_scale = 0.0;
};

struct NamedValues {
  std::vector<std::string> names;
  std::vector<Matrix> values;
};

NamedValues param_values(const std::vector<Param*>& params);
// Throws unless names and shapes line up one to one.
void load_param_values(const std::vector<Param*>& params, const NamedValues& values);

struct RunLog {
  TrainConfig cfg;
  std::vector<LogRow> rows;
  std::size_t best_row = 0;
  NamedValues best_params;  // every learner parameter at the best snapshot
  std::string best_rng_state;
  EvalResult final_eval;    // best snapshot on final_eval_episodes fresh episodes
  long env_steps = 0;
  long learning_steps = 0;
};

using ProgressFn = std::function<void(const LogRow&)>;

RunLog train_run(const TrainConfig& cfg, env::MarkovGame& game, const ProgressFn& progress = {});
RunLog train_run(const TrainConfig& cfg, const ProgressFn& progress = {});

// Builds the environment named in the config.
std::unique_ptr<env::MarkovGame> make_env(const TrainConfig& cfg);
std::vector<int> action_dims(const env::MarkovGame& game);

// CSV with a "# config_hash=..." line, a header row, one line per snapshot.
std::string runlog_csv(const RunLog& log);
std::string format_real(double v);

}  // namespace marl::agents
