#include "marl/agents/train.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "marl/envs/particle.hpp"

namespace marl::agents {

std::unique_ptr<env::MarkovGame> make_env(const TrainConfig& cfg) {
  env::Task task = env::parse_task(cfg.env);
  if (task == env::Task::Chain) throw std::invalid_argument("the chain game has discrete actions; use `toy`");
  return env::make_game(task, cfg.n_agents);
}

std::vector<int> action_dims(const env::MarkovGame& game) {
  std::vector<int> out;
  for (int i = 0; i < game.n_agents(); ++i) {
    env::ActionSpec spec = game.action_spec(i);
    if (spec.discrete) throw std::invalid_argument("continuous actions required for agent " + std::to_string(i));
    out.push_back(spec.size);
  }
  return out;
}

EvalResult evaluate(Learner& learner, env::MarkovGame& game, int episodes, Rng& env_rng, int max_steps, Rng* mask_rng) {
  const auto n = static_cast<std::size_t>(game.n_agents());
  EvalResult r;
  r.per_agent.assign(n, 0.0);
  for (int e = 0; e < episodes; ++e) {
    env::JointObs obs = game.reset(env_rng);
    for (int t = 0; t < max_steps; ++t) {
      ActionChoice c = learner.act(obs, mask_rng ? Mode::Train : Mode::Eval, mask_rng, nullptr, 0.0, nullptr);
      env::StepResult s = game.step(c.actions, env_rng);
      for (std::size_t i = 0; i < n; ++i) r.per_agent[i] += s.rewards[i];
      obs = std::move(s.obs);
      if (s.done) break;
    }
  }
  for (double& v : r.per_agent) v /= episodes;
  for (double v : r.per_agent) r.mean += v;
  r.mean /= static_cast<double>(n);
  return r;
}

NamedValues param_values(const std::vector<Param*>& params) {
  NamedValues out;
  for (const Param* p : params) {
    out.names.push_back(p->name);
    out.values.push_back(p->data);
  }
  return out;
}

void load_param_values(const std::vector<Param*>& params, const NamedValues& values) {
  if (params.size() != values.values.size()) throw std::invalid_argument("parameter count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->name != values.names[k]) throw std::invalid_argument("parameter name mismatch: " + params[k]->name);
    if (params[k]->data.rows() != values.values[k].rows() || params[k]->data.cols() != values.values[k].cols())
      throw std::invalid_argument("parameter shape mismatch: " + params[k]->name);
    params[k]->data = values.values[k];
  }
}

namespace {

struct Accumulator {
  std::vector<double> critic;
  double team_spirit = 0.0, mask_kl = 0.0;
  int count = 0;

  void add(const UpdateStats& s) {
    if (critic.empty()) critic.assign(s.critic_loss.size(), 0.0);
    for (std::size_t i = 0; i < critic.size(); ++i) critic[i] += s.critic_loss[i];
    team_spirit += s.team_spirit;
    mask_kl += s.mask_kl;
    ++count;
  }
};

}  // namespace

RunLog train_run(const TrainConfig& cfg, env::MarkovGame& game, const ProgressFn& progress) {
  cfg.validate();
  if (game.n_agents() != cfg.n_agents) throw std::invalid_argument("environment agent count differs from config");
  const std::vector<int> obs_dims = game.obs_dims();
  const std::vector<int> act_dims = action_dims(game);
  const auto n = static_cast<std::size_t>(cfg.n_agents);

  Rng env_rng = make_rng(cfg.seed, "env");
  Rng noise_rng = make_rng(cfg.seed, "noise");
  Rng buffer_rng = make_rng(cfg.seed, "buffer");
  Rng gumbel_rng = make_rng(cfg.seed, "gumbel");
  Rng coach_rng = make_rng(cfg.seed, "gumbel.coach");
  Rng act_rng = make_rng(cfg.seed, "gumbel.act");

  Learner learner(cfg, obs_dims, act_dims);
  const auto total_steps = static_cast<std::size_t>(cfg.episodes) * static_cast<std::size_t>(cfg.max_steps);
  ReplayBuffer buffer(std::min(static_cast<std::size_t>(cfg.buffer_capacity), total_steps), obs_dims, act_dims);
  std::vector<OUNoise> ou;
  for (int d : act_dims) ou.emplace_back(d, cfg.ou_theta, cfg.ou_sigma);

  RunLog log;
  log.cfg = cfg;
  Accumulator acc;
  double best = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  int episode = 0;

  auto snapshot = [&]() {
    Rng eval_rng = make_rng(cfg.seed, "eval");
    EvalResult e = evaluate(learner, game, cfg.eval_episodes, eval_rng, cfg.max_steps);
    LogRow row;
    row.episode = episode;
    row.learning_step = log.learning_steps;
    row.eval_return = e.per_agent;
    row.mean_return = e.mean;
    const double k = acc.count > 0 ? acc.count : std::numeric_limits<double>::quiet_NaN();
    row.critic_loss.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < acc.critic.size(); ++i) row.critic_loss[i] = acc.critic[i] / k;
    row.team_spirit = acc.team_spirit / k;
    row.mask_kl = acc.mask_kl / k;
    row.noise_scale = scale;
    acc = Accumulator{};
    if (e.mean > best) {
      best = e.mean;
      log.best_row = log.rows.size();
      log.best_params = param_values(learner.all_params());
      std::ostringstream s;
      s << env_rng;
      log.best_rng_state = s.str();
    }
    log.rows.push_back(row);
    if (progress) progress(row);
  };

  for (; episode < cfg.episodes;) {
    env::JointObs obs = game.reset(env_rng);
    for (auto& o : ou) o.reset();
    scale = noise_scale_at(episode, cfg.episodes, cfg.noise_scale);
    bool snap = false;
    for (int t = 0; t < cfg.max_steps; ++t) {
      ActionChoice c = learner.act(obs, Mode::Train, &act_rng, &ou, scale, &noise_rng);
      env::StepResult s = game.step(c.actions, env_rng);
      buffer.add(Transition{obs, c.actions, s.rewards, s.obs, s.terminal});
      ++log.env_steps;
      if (log.env_steps % cfg.steps_per_update == 0 && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        acc.add(learner.update(buffer.sample(static_cast<std::size_t>(cfg.batch_size), buffer_rng), gumbel_rng, coach_rng));
        ++log.learning_steps;
        if (log.learning_steps % cfg.eval_every == 0) snap = true;
      }
      obs = std::move(s.obs);
      if (s.done) break;
    }
    ++episode;
    if (snap) snapshot();
  }
  if (log.rows.empty() || log.rows.back().learning_step != log.learning_steps || log.rows.back().episode != episode)
    snapshot();

  load_param_values(learner.all_params(), log.best_params);
  Rng final_rng = make_rng(cfg.seed, "final-eval");
  log.final_eval = evaluate(learner, game, cfg.final_eval_episodes, final_rng, cfg.max_steps);
  return log;
}

RunLog train_run(const TrainConfig& cfg, const ProgressFn& progress) {
  auto game = make_env(cfg);
  return train_run(cfg, *game, progress);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string runlog_csv(const RunLog& log) {
  const std::size_t n = static_cast<std::size_t>(log.cfg.n_agents);
  std::ostringstream out;
  out << "# config_hash=" << hex64(config_hash(log.cfg)) << " env=" << log.cfg.env
      << " variant=" << variant_name(log.cfg.variant) << " seed=" << log.cfg.seed << "\n";
  out << "episode,learning_step";
  for (std::size_t i = 0; i < n; ++i) out << ",eval_return_agent" << i;
  out << ",mean_return";
  for (std::size_t i = 0; i < n; ++i) out << ",critic_loss_agent" << i;
  out << ",team_spirit_loss,mask_kl,noise_scale\n";
  for (const LogRow& r : log.rows) {
    out << r.episode << "," << r.learning_step;
    for (double v : r.eval_return) out << "," << format_real(v);
    out << "," << format_real(r.mean_return);
    for (double v : r.critic_loss) out << "," << format_real(v);
    out << "," << format_real(r.team_spirit) << "," << format_real(r.mask_kl) << "," << format_real(r.noise_scale)
        << "\n";
  }
  return out.str();
}

}  // namespace marl::agents
