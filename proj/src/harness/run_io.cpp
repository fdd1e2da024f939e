#include "marl/harness/run_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "marl/harness/checkpoint.hpp"

namespace marl::harness {

namespace fs = std::filesystem;
using agents::format_real;

std::string default_out_root() {
  const char* env = std::getenv("MARL_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : "runs";
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string>& run_stream_labels() {
  static const std::vector<std::string> labels{"env",     "init",       "init.heads",   "init.mask", "init.coach",
                                               "noise",   "buffer",     "gumbel",       "gumbel.coach",
                                               "gumbel.act", "eval",    "final-eval",   "record",    "record.masks"};
  return labels;
}

nlohmann::ordered_json run_summary(const agents::RunLog& log) {
  nlohmann::ordered_json j;
  j["config_hash"] = agents::hex64(agents::config_hash(log.cfg));
  j["env"] = log.cfg.env;
  j["variant"] = agents::variant_name(log.cfg.variant);
  j["seed"] = log.cfg.seed;
  j["episodes"] = log.cfg.episodes;
  j["env_steps"] = log.env_steps;
  j["learning_steps"] = log.learning_steps;
  const auto& best = log.rows.at(log.best_row);
  j["best_episode"] = best.episode;
  j["best_learning_step"] = best.learning_step;
  j["best_eval_return"] = best.mean_return;
  j["final_eval_episodes"] = log.cfg.final_eval_episodes;
  j["final_eval_per_agent"] = log.final_eval.per_agent;
  j["final_eval_return"] = log.final_eval.mean;
  return j;
}

void write_run_artifacts(const agents::RunLog& log, const std::string& dir) {
  fs::create_directories(dir);
  write_text(dir + "/config.json", agents::to_json(log.cfg).dump(2) + "\n");
  write_text(dir + "/run.csv", agents::runlog_csv(log));
  write_text(dir + "/summary.json", run_summary(log).dump(2) + "\n");
  save_checkpoint(checkpoint_from_run(log), dir + "/best.ckpt");
}

double read_run_score(const std::string& dir) {
  auto j = nlohmann::json::parse(read_text(dir + "/summary.json"));
  return j.at("final_eval_return").get<double>();
}

std::string recording_csv(agents::Learner& learner, env::MarkovGame& game, const agents::TrainConfig& cfg, int episodes,
                          bool sampled_masks) {
  const auto dims = game.obs_dims();
  const auto acts = agents::action_dims(game);
  int max_obs = 0, max_act = 0;
  for (int d : dims) max_obs = std::max(max_obs, d);
  for (int d : acts) max_act = std::max(max_act, d);

  std::ostringstream out;
  out << "# config_hash=" << agents::hex64(agents::config_hash(cfg)) << " env=" << cfg.env
      << " variant=" << agents::variant_name(cfg.variant) << " seed=" << cfg.seed
      << " mode=" << (sampled_masks ? "sampled" : "argmax") << "\n";
  out << "step,agent_id";
  for (int k = 0; k < max_obs; ++k) out << ",obs_" << k;
  for (int k = 0; k < max_act; ++k) out << ",act_" << k;
  out << ",reward,mask_id\n";

  Rng env_rng = make_rng(cfg.seed, "record");
  Rng mask_rng = make_rng(cfg.seed, "record.masks");
  const auto mode = sampled_masks ? agents::Mode::Train : agents::Mode::Eval;
  for (int e = 0; e < episodes; ++e) {
    env::JointObs obs = game.reset(env_rng);
    for (int t = 0; t < cfg.max_steps; ++t) {
      agents::ActionChoice c = learner.act(obs, mode, sampled_masks ? &mask_rng : nullptr, nullptr, 0.0, nullptr);
      env::StepResult s = game.step(c.actions, env_rng);
      for (std::size_t i = 0; i < obs.size(); ++i) {
        out << t << "," << i;
        for (int k = 0; k < max_obs; ++k)
          out << "," << (k < static_cast<int>(obs[i].size()) ? format_real(obs[i][static_cast<std::size_t>(k)]) : "");
        for (int k = 0; k < max_act; ++k)
          out << ","
              << (k < static_cast<int>(c.actions[i].size()) ? format_real(c.actions[i][static_cast<std::size_t>(k)]) : "");
        out << "," << format_real(s.rewards[i]) << "," << c.mask_ids[i] << "\n";
      }
      obs = std::move(s.obs);
      if (s.done) break;
    }
  }
  return out.str();
}

nlohmann::ordered_json to_json(const tab::ToyConfig& c) {
  nlohmann::ordered_json j;
  j["length"] = c.length;
  j["episodes"] = c.episodes;
  j["n_seeds"] = c.n_seeds;
  j["eval_episodes"] = c.eval_episodes;
  j["step_cap_factor"] = c.step_cap_factor;
  j["lr"] = c.lr;
  j["gamma"] = c.gamma;
  j["temperature"] = c.temperature;
  j["master_seed"] = c.master_seed;
  return j;
}

std::string toy_csv(const tab::ToyConfig& cfg, const tab::ToyCurves& baseline, const tab::ToyCurves& coordinated) {
  std::ostringstream out;
  out << "# config_hash=" << agents::hex64(fnv1a64(to_json(cfg).dump())) << " env=chain\n";
  out << "variant,seed,episode,mean_greedy_return\n";
  for (const tab::ToyCurves* c : {&baseline, &coordinated})
    for (std::size_t s = 0; s < c->per_seed.size(); ++s)
      for (std::size_t e = 0; e < c->per_seed[s].size(); ++e)
        out << (c->coordinated ? "coordinated" : "baseline") << "," << s << "," << e + 1 << ","
            << format_real(c->per_seed[s][e]) << "\n";
  return out.str();
}

}  // namespace marl::harness
