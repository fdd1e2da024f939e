#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "marl/agents/train.hpp"
#include "marl/tabular/qlearning.hpp"

namespace marl::harness {

// $MARL_OUT_DIR, or "runs" when unset.
std::string default_out_root();
// Creates parent directories as needed.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Every random stream label a training run, its evaluation and its recording use.
const std::vector<std::string>& run_stream_labels();

nlohmann::ordered_json run_summary(const agents::RunLog& log);
// config.json, run.csv, summary.json, best.ckpt
void write_run_artifacts(const agents::RunLog& log, const std::string& dir);
// Mean final-evaluation return stored in <dir>/summary.json.
double read_run_score(const std::string& dir);

// Rollouts of the learner, one row per agent per step. Masks are argmax unless sampled.
std::string recording_csv(agents::Learner& learner, env::MarkovGame& game, const agents::TrainConfig& cfg, int episodes,
                          bool sampled_masks);

nlohmann::ordered_json to_json(const tab::ToyConfig& c);
// Columns variant, seed, episode, mean_greedy_return.
std::string toy_csv(const tab::ToyConfig& cfg, const tab::ToyCurves& baseline, const tab::ToyCurves& coordinated);

}  // namespace marl::harness
