#include "marl/harness/search.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

#include "marl/agents/train.hpp"
#include "marl/analysis/metrics.hpp"
#include "marl/harness/run_io.hpp"

extern char** environ;

namespace marl::harness {

using agents::format_real;
using agents::TrainConfig;
using agents::Variant;

namespace {

double log_uniform(Rng& rng, Range r) { return std::pow(10.0, uniform(rng, r.first, r.second)); }

pid_t spawn(const std::vector<std::string>& argv) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, args[0], nullptr, nullptr, args.data(), environ);
  if (rc != 0) throw std::runtime_error("posix_spawn failed for " + argv[0] + ": " + std::to_string(rc));
  return pid;
}

}  // namespace

TrainConfig sample_config(const SearchSpace& space, Variant variant, const TrainConfig& base, Rng& rng) {
  TrainConfig c = base;
  c.variant = variant;
  c.actor_lr = log_uniform(rng, space.log_actor_lr);
  c.critic_lr_ratio = log_uniform(rng, space.log_critic_ratio);
  c.tau = log_uniform(rng, space.log_tau);
  c.noise_scale = uniform(rng, space.noise_scale.first, space.noise_scale.second);
  c.lambda1 = c.lambda2 = c.lambda3 = 0.0;
  c.coach_frozen = variant == Variant::PolicyMask;
  const bool team = uses_team_spirit(variant);
  const bool coach = uses_coach(variant);
  if (team || coach) c.lambda1 = log_uniform(rng, space.log_lambda1);
  if (variant == Variant::TeamReg || coach) c.lambda2 = log_uniform(rng, space.log_lambda2);
  if (coach) c.lambda3 = log_uniform(rng, space.log_lambda3);
  c.validate();
  return c;
}

void run_jobs(const std::vector<Job>& jobs, int workers, const std::vector<std::string>& worker) {
  for (const Job& j : jobs) {
    std::filesystem::create_directories(j.dir);
    write_text(j.dir + "/config.json", agents::to_json(j.cfg).dump(2) + "\n");
  }
  if (worker.empty()) {
    for (const Job& j : jobs) write_run_artifacts(agents::train_run(j.cfg), j.dir);
    return;
  }
  workers = std::max(1, workers);
  std::map<pid_t, std::string> running;
  std::vector<std::string> failed;
  std::size_t next = 0;
  while (next < jobs.size() || !running.empty()) {
    while (next < jobs.size() && static_cast<int>(running.size()) < workers) {
      std::vector<std::string> argv = worker;
      argv.insert(argv.end(), {"--config", jobs[next].dir + "/config.json", "--out", jobs[next].dir});
      running[spawn(argv)] = jobs[next].dir;
      ++next;
    }
    int status = 0;
    const pid_t done = waitpid(-1, &status, 0);
    if (done < 0) throw std::runtime_error("waitpid failed");
    auto it = running.find(done);
    if (it == running.end()) continue;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed.push_back(it->second);
    running.erase(it);
  }
  if (!failed.empty()) throw std::runtime_error("worker failed for " + failed.front());
}

std::vector<RankedConfig> rank_results(std::vector<JobResult> results, const std::vector<TrainConfig>& configs) {
  std::sort(results.begin(), results.end(), [](const JobResult& a, const JobResult& b) {
    return std::tie(a.config_id, a.seed_index) < std::tie(b.config_id, b.seed_index);
  });
  std::vector<RankedConfig> ranked;
  for (const JobResult& r : results) {
    if (ranked.empty() || ranked.back().config_id != r.config_id) {
      RankedConfig c;
      c.config_id = r.config_id;
      c.cfg = configs.at(static_cast<std::size_t>(r.config_id));
      ranked.push_back(c);
    }
    ranked.back().seed_scores.push_back(r.score);
  }
  for (auto& c : ranked) {
    c.mean = analysis::mean(c.seed_scores);
    c.stderr_ = analysis::standard_error(c.seed_scores);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedConfig& a, const RankedConfig& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.config_id < b.config_id;
  });
  return ranked;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of nothing");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string search_results_csv(const std::vector<RankedConfig>& ranked, const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "rank,config_id,variant,env,actor_lr,critic_lr_ratio,tau,lambda1,lambda2,lambda3,noise_scale,n_seeds,score,"
         "stderr\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& c = ranked[r];
    out << r + 1 << "," << c.config_id << "," << agents::variant_name(c.cfg.variant) << "," << c.cfg.env << ","
        << format_real(c.cfg.actor_lr) << "," << format_real(c.cfg.critic_lr_ratio) << "," << format_real(c.cfg.tau)
        << "," << format_real(c.cfg.lambda1) << "," << format_real(c.cfg.lambda2) << "," << format_real(c.cfg.lambda3)
        << "," << format_real(c.cfg.noise_scale) << "," << c.seed_scores.size() << "," << format_real(c.mean) << ","
        << format_real(c.stderr_) << "\n";
  }
  return out.str();
}

std::string search_summary_csv(const std::vector<RankedConfig>& ranked, const TrainConfig& base,
                               const std::string& hash) {
  std::vector<double> scores;
  for (const auto& c : ranked) scores.push_back(c.mean);
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "env,variant,n_configs,min,q1,median,q3,max,best_config_id,best_score\n";
  out << base.env << "," << agents::variant_name(base.variant) << "," << scores.size() << ","
      << format_real(quantile(scores, 0.0)) << "," << format_real(quantile(scores, 0.25)) << ","
      << format_real(quantile(scores, 0.5)) << "," << format_real(quantile(scores, 0.75)) << ","
      << format_real(quantile(scores, 1.0)) << "," << ranked.front().config_id << ","
      << format_real(ranked.front().mean) << "\n";
  return out.str();
}

std::vector<RankedConfig> search(const SearchOptions& opt) {
  if (opt.n_configs < 1 || opt.n_seeds < 1) throw std::invalid_argument("search needs at least one config and seed");
  Rng rng = make_rng(opt.master_seed, "search");
  std::vector<TrainConfig> configs;
  std::vector<Job> jobs;
  for (int c = 0; c < opt.n_configs; ++c) {
    configs.push_back(sample_config(opt.space, opt.base.variant, opt.base, rng));
    for (int s = 0; s < opt.n_seeds; ++s) {
      Job j;
      j.config_id = c;
      j.seed_index = s;
      j.cfg = configs.back();
      j.cfg.seed = derive_seed(opt.master_seed, "search.seed" + std::to_string(s));
      j.dir = opt.out_dir + "/c" + std::to_string(c) + "_s" + std::to_string(s);
      jobs.push_back(j);
    }
  }
  run_jobs(jobs, opt.workers, opt.worker);
  std::vector<JobResult> results;
  for (const Job& j : jobs) results.push_back({j.config_id, j.seed_index, read_run_score(j.dir)});
  auto ranked = rank_results(results, configs);

  TrainConfig keyed = opt.base;
  keyed.seed = opt.master_seed;
  const std::string hash = agents::hex64(agents::config_hash(keyed));
  write_text(opt.out_dir + "/search_results.csv", search_results_csv(ranked, hash));
  write_text(opt.out_dir + "/search_summary.csv", search_summary_csv(ranked, opt.base, hash));
  write_text(opt.out_dir + "/best_config.json", agents::to_json(ranked.front().cfg).dump(2) + "\n");
  return ranked;
}

}  // namespace marl::harness
