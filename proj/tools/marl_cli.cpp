#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "marl/analysis/tables.hpp"
#include "marl/harness/checkpoint.hpp"
#include "marl/harness/presets.hpp"
#include "marl/harness/run_io.hpp"
#include "marl/harness/search.hpp"
#include "marl/tabular/qlearning.hpp"

namespace fs = std::filesystem;
using namespace marl;
using agents::TrainConfig;

namespace {

struct Common {
  std::string env = "spread";
  std::string variant = "maddpg";
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::string config;
  std::string out;
  int workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--env", c.env, "spread, bounce, compromise, chase");
  cmd->add_option("--variant", c.variant,
                  "ddpg, maddpg, sharing, teamreg, agent-modelling, coachreg, policy-mask");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--episodes", c.episodes);
  cmd->add_option("--config", c.config, "JSON TrainConfig; flags given explicitly override it");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--workers", c.workers, "parallel worker processes")->check(CLI::PositiveNumber);
}

// Preset for env/variant unless a config file is given; explicit flags win.
TrainConfig resolve_config(CLI::App* cmd, const Common& c) {
  TrainConfig cfg;
  if (!c.config.empty()) {
    cfg = agents::load_config(c.config);
    if (cmd->count("--env")) cfg.env = c.env;
    if (cmd->count("--variant")) cfg.variant = agents::parse_variant(c.variant);
  } else {
    cfg = harness::preset_config(c.env, agents::parse_variant(c.variant));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.episodes) cfg.episodes = *c.episodes;
  cfg.validate();
  return cfg;
}

std::string out_dir(const Common& c, const std::string& fallback) {
  return c.out.empty() ? harness::default_out_root() + "/" + fallback : c.out;
}

std::string self_exe() { return fs::read_symlink("/proc/self/exe").string(); }

void print_row(const agents::LogRow& r) {
  std::printf("episode %6d  step %6ld  eval %9.3f  noise %.3f  ts %.4g\n", r.episode, r.learning_step, r.mean_return,
              r.noise_scale, r.team_spirit);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordination-regularized multi-agent actor-critic"};
  app.require_subcommand(1);

  // toy
  auto* toy = app.add_subcommand("toy", "two-agent chain experiment, with and without the coordination module");
  Common toy_c;
  toy_c.episodes = 200;
  int toy_length = 5, toy_seeds = 20;
  toy->add_option("--seed", toy_c.seed);
  toy->add_option("--episodes", toy_c.episodes);
  toy->add_option("--out", toy_c.out);
  toy->add_option("--length", toy_length, "chain length L")->check(CLI::PositiveNumber);
  toy->add_option("--seeds", toy_seeds)->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train one run");
  Common train_c;
  bool quiet = false;
  add_common(train, train_c);
  train->add_flag("--quiet", quiet);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt;
  std::optional<int> eval_episodes;
  eval->add_option("checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes);

  // search
  auto* srch = app.add_subcommand("search", "random hyper-parameter search");
  Common srch_c;
  int n_configs = 50, n_seeds = 3;
  add_common(srch, srch_c);
  srch->add_option("--configs", n_configs)->check(CLI::PositiveNumber);
  srch->add_option("--seeds", n_seeds)->check(CLI::PositiveNumber);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "coordination metrics from recordings and RunLogs");
  std::vector<std::string> inputs;
  std::string analyze_out;
  int window = 10, mask_k = 4;
  analyze->add_option("inputs", inputs, "recording or RunLog CSVs")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_out);
  analyze->add_option("--window", window, "smoothing window (snapshots)")->check(CLI::PositiveNumber);
  analyze->add_option("--k", mask_k, "number of masks")->check(CLI::PositiveNumber);

  // record
  auto* record = app.add_subcommand("record", "episode CSVs from a checkpoint");
  std::string record_ckpt, record_out;
  int record_episodes = 100;
  record->add_option("checkpoint", record_ckpt)->required()->check(CLI::ExistingFile);
  record->add_option("--episodes", record_episodes)->check(CLI::PositiveNumber);
  record->add_option("--out", record_out);

  // config
  auto* preset = app.add_subcommand("config", "print a preset TrainConfig");
  std::string preset_env = "spread", preset_variant = "maddpg", preset_scale = "desk";
  preset->add_option("--env", preset_env);
  preset->add_option("--variant", preset_variant);
  preset->add_option("--scale", preset_scale, "paper or desk");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*toy) {
      tab::ToyConfig cfg;
      cfg.length = toy_length;
      cfg.n_seeds = toy_seeds;
      cfg.episodes = *toy_c.episodes;
      cfg.master_seed = toy_c.seed.value_or(0);
      auto base = tab::run_toy_experiment(cfg, false);
      auto coord = tab::run_toy_experiment(cfg, true);
      const double thr = tab::ninety_percent_threshold(cfg);
      std::printf("threshold %.3f\nbaseline    mean hitting episode %.2f\ncoordinated mean hitting episode %.2f\n", thr,
                  tab::mean_hitting_episode(base, thr), tab::mean_hitting_episode(coord, thr));
      const std::string path = out_dir(toy_c, "toy") + "/toy_curves.csv";
      harness::write_text(path, harness::toy_csv(cfg, base, coord));
      std::printf("wrote %s\n", path.c_str());
    } else if (*train) {
      TrainConfig cfg = resolve_config(train, train_c);
      const std::string dir =
          out_dir(train_c, cfg.env + "_" + agents::variant_name(cfg.variant) + "_s" + std::to_string(cfg.seed));
      auto log = agents::train_run(cfg, quiet ? agents::ProgressFn{} : agents::ProgressFn{print_row});
      harness::write_run_artifacts(log, dir);
      if (!quiet)
        std::printf("final eval %.4f over %d episodes (best snapshot at episode %d)\nwrote %s\n", log.final_eval.mean,
                    cfg.final_eval_episodes, log.rows[log.best_row].episode, dir.c_str());
    } else if (*eval) {
      auto ckpt = harness::load_checkpoint(eval_ckpt);
      auto game = agents::make_env(ckpt.cfg);
      agents::Learner learner(ckpt.cfg, game->obs_dims(), agents::action_dims(*game));
      harness::restore(learner, ckpt);
      Rng rng = make_rng(ckpt.cfg.seed, "eval");
      auto r = agents::evaluate(learner, *game, eval_episodes.value_or(ckpt.cfg.eval_episodes), rng, ckpt.cfg.max_steps);
      nlohmann::ordered_json j;
      j["config_hash"] = agents::hex64(agents::config_hash(ckpt.cfg));
      j["episode"] = ckpt.episode;
      j["per_agent"] = r.per_agent;
      j["mean_return"] = r.mean;
      std::cout << j.dump(2) << "\n";
    } else if (*srch) {
      harness::SearchOptions opt;
      opt.base = resolve_config(srch, srch_c);
      opt.n_configs = n_configs;
      opt.n_seeds = n_seeds;
      opt.master_seed = opt.base.seed;
      opt.workers = srch_c.workers;
      opt.worker = {self_exe(), "train", "--quiet"};
      opt.out_dir = out_dir(srch_c, "search_" + opt.base.env + "_" + agents::variant_name(opt.base.variant));
      auto ranked = harness::search(opt);
      std::printf("best config %d: %.4f (+- %.4f)\nwrote %s\n", ranked.front().config_id, ranked.front().mean,
                  ranked.front().stderr_, opt.out_dir.c_str());
    } else if (*analyze) {
      std::vector<analysis::AnalysisRow> rows;
      std::string hashes;
      for (const auto& path : inputs) {
        auto t = analysis::read_csv(path);
        hashes += t.meta.count("config_hash") ? t.meta.at("config_hash") : "";
        bool is_recording = std::find(t.header.begin(), t.header.end(), "mask_id") != t.header.end();
        auto part = is_recording ? analysis::analyze_recording(t, mask_k) : analysis::analyze_runlog(t, window);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      const std::string csv = analysis::analysis_csv(rows, agents::hex64(fnv1a64(hashes)));
      if (analyze_out.empty()) {
        std::cout << csv;
      } else {
        harness::write_text(analyze_out + "/analysis.csv", csv);
        std::printf("wrote %s/analysis.csv\n", analyze_out.c_str());
      }
    } else if (*record) {
      auto ckpt = harness::load_checkpoint(record_ckpt);
      auto game = agents::make_env(ckpt.cfg);
      agents::Learner learner(ckpt.cfg, game->obs_dims(), agents::action_dims(*game));
      harness::restore(learner, ckpt);
      const std::string dir = record_out.empty() ? fs::path(record_ckpt).parent_path().string() : record_out;
      harness::write_text(dir + "/episodes_argmax.csv",
                          harness::recording_csv(learner, *game, ckpt.cfg, record_episodes, false));
      if (learner.masked())
        harness::write_text(dir + "/episodes_sampled.csv",
                            harness::recording_csv(learner, *game, ckpt.cfg, record_episodes, true));
      std::printf("wrote recordings to %s\n", dir.c_str());
    } else if (*preset) {
      auto cfg = harness::preset_config(preset_env, agents::parse_variant(preset_variant),
                                        harness::parse_scale(preset_scale));
      std::cout << agents::to_json(cfg).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
