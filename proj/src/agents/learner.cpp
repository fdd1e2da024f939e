#include "marl/agents/learner.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "marl/autograd/losses.hpp"
#include "marl/autograd/ops.hpp"

namespace marl::agents {

using ad::Mlp;
using ad::MlpSpec;
using ad::OutputActivation;

Matrix mask_from_logits(const Matrix& logits, Mode mode, Rng* rng) {
  if (mode == Mode::Eval || rng == nullptr) return ad::one_hot_argmax(logits);
  return ad::one_hot_argmax(logits + ad::gumbel_noise(logits.rows(), logits.cols(), *rng));
}

Var team_spirit_discrete(Var true_logits, Var pred_logits) {
  return -ad::mean(ad::kl_from_logits(true_logits, pred_logits));
}

double team_spirit_discrete(const std::vector<double>& p_true, const std::vector<double>& p_pred) {
  return -ad::kl_categorical(p_true, p_pred);
}

Learner::Learner(const TrainConfig& cfg, std::vector<int> obs_dims, std::vector<int> action_dims)
    : cfg_(cfg), n_(static_cast<int>(obs_dims.size())), obs_dims_(std::move(obs_dims)),
      action_dims_(std::move(action_dims)) {
  cfg_.validate();
  if (n_ != cfg_.n_agents) throw std::invalid_argument("Learner: agent count differs from config");
  if (static_cast<int>(action_dims_.size()) != n_) throw std::invalid_argument("Learner: action dims per agent");
  if (sharing())
    for (int i = 1; i < n_; ++i)
      if (obs_dims_[static_cast<std::size_t>(i)] != obs_dims_[0] || action_dims_[static_cast<std::size_t>(i)] != action_dims_[0])
        throw std::invalid_argument("Learner: parameter sharing needs identical agents");

  Rng init = make_rng(cfg_.seed, "init");
  Rng init_heads = make_rng(cfg_.seed, "init.heads");
  Rng init_mask = make_rng(cfg_.seed, "init.mask");
  Rng init_coach = make_rng(cfg_.seed, "init.coach");

  const Eigen::Index h = cfg_.hidden;
  const int total_obs = std::accumulate(obs_dims_.begin(), obs_dims_.end(), 0);
  const int total_act = std::accumulate(action_dims_.begin(), action_dims_.end(), 0);
  const int sets = sharing() ? 1 : n_;
  for (int s = 0; s < sets; ++s) {
    const std::string prefix = sharing() ? "shared." : "agent" + std::to_string(s) + ".";
    const auto od = obs_dims_[static_cast<std::size_t>(s)];
    const auto ad_ = action_dims_[static_cast<std::size_t>(s)];
    ActorNet a;
    a.policy = Mlp(prefix + "actor", MlpSpec{od, {h, h}, ad_, OutputActivation::Tanh, cfg_.layer_norm}, init);
    const int critic_in = cfg_.variant == Variant::DDPG ? od + ad_ : total_obs + total_act;
    CriticNet c;
    c.q = Mlp(prefix + "critic", MlpSpec{critic_in, {h, h}, 1, OutputActivation::Linear, cfg_.layer_norm}, init);
    for (int j = 0; j < n_; ++j) {
      if (j == s) continue;
      a.heads.emplace_back(prefix + "actor.predict" + std::to_string(j), h, action_dims_[static_cast<std::size_t>(j)],
                           init_heads);
    }
    if (masked()) a.mask_layer = ad::Linear(prefix + "actor.mask", od, cfg_.mask_k, init_mask);
    actors_.push_back(std::move(a));
    critics_.push_back(std::move(c));
  }
  target_actors_ = actors_;
  target_critics_ = critics_;
  for (auto& t : target_actors_) prefix_names(t.params(), "target.");
  for (auto& t : target_critics_) prefix_names(t.q.params(), "target.");

  if (masked()) {
    coach_.emplace();
    coach_->net = Mlp("coach", MlpSpec{total_obs, {h, h}, cfg_.mask_k, OutputActivation::Linear, cfg_.layer_norm},
                      init_coach);
    coach_opt_.emplace(coach_->net.params(), cfg_.coach_lr());
  }
  for (int s = 0; s < sets; ++s) {
    actor_opt_.emplace_back(actors_[static_cast<std::size_t>(s)].params(), cfg_.actor_lr);
    critic_opt_.emplace_back(critics_[static_cast<std::size_t>(s)].q.params(), cfg_.critic_lr());
  }
}

std::vector<int> Learner::critic_order(int i) const {
  if (cfg_.variant == Variant::DDPG) return {i};
  std::vector<int> order;
  if (sharing()) order.push_back(i);
  for (int k = 0; k < n_; ++k)
    if (!sharing() || k != i) order.push_back(k);
  return order;
}

Var Learner::critic_input(Graph& g, int i, const std::vector<Var>& obs, const std::vector<Var>& actions) {
  (void)g;
  std::vector<Var> parts;
  const auto order = critic_order(i);
  for (int k : order) parts.push_back(obs[static_cast<std::size_t>(k)]);
  for (int k : order) parts.push_back(actions[static_cast<std::size_t>(k)]);
  return ad::concat_cols(parts);
}

Matrix Learner::target_action(int j, const Matrix& obs, const Matrix* noise) {
  ActorNet& t = target_actor(j);
  Graph g;
  Var o = g.constant(obs);
  std::optional<Var> mask;
  if (masked()) {
    Matrix logits = t.mask_logits(g, o, false).value();
    mask = g.constant(ad::one_hot_argmax(noise != nullptr ? Matrix(logits + *noise) : logits));
  }
  return t.act(g, o, mask, false).value();
}

std::optional<Var> Learner::own_mask(Graph& g, int i, Var obs, const Matrix& noise, bool track) {
  if (!masked()) return std::nullopt;
  Var logits = actor(i).mask_logits(g, obs, track);
  return ad::gumbel_softmax(logits, noise, cfg_.gumbel_temperature, relaxation_).sample;
}

UpdateNoise Learner::draw_noise(Eigen::Index batch, Rng& gumbel_rng, Rng& coach_rng) const {
  UpdateNoise n;
  if (!uses_masks(cfg_.variant)) return n;
  for (int j = 0; j < n_; ++j) {
    n.own.push_back(ad::gumbel_noise(batch, cfg_.mask_k, gumbel_rng));
    n.target_next.push_back(ad::gumbel_noise(batch, cfg_.mask_k, gumbel_rng));
    n.target_now.push_back(ad::gumbel_noise(batch, cfg_.mask_k, gumbel_rng));
  }
  n.coach = ad::gumbel_noise(batch, cfg_.mask_k, coach_rng);
  return n;
}

Var Learner::critic_loss(Graph& g, int i, const Batch& b, const UpdateNoise& n, bool track) {
  const auto order = critic_order(i);
  Matrix q_next;
  {
    Graph tg;
    std::vector<Var> obs(static_cast<std::size_t>(n_)), act(static_cast<std::size_t>(n_));
    for (int k : order) {
      const auto uk = static_cast<std::size_t>(k);
      obs[uk] = tg.constant(b.next_obs[uk]);
      act[uk] = tg.constant(cached_ ? next_cache_[uk] : target_action(k, b.next_obs[uk], masked() ? &n.target_next[uk] : nullptr));
    }
    q_next = target_critic(i).q.forward(tg, critic_input(tg, i, obs, act), std::nullopt, false).value();
  }
  const auto ui = static_cast<std::size_t>(i);
  Matrix y = b.rewards[ui] + cfg_.gamma * b.not_terminal.cwiseProduct(q_next);

  std::vector<Var> obs(static_cast<std::size_t>(n_)), act(static_cast<std::size_t>(n_));
  for (int k : order) {
    obs[static_cast<std::size_t>(k)] = g.constant(b.obs[static_cast<std::size_t>(k)]);
    act[static_cast<std::size_t>(k)] = g.constant(b.actions[static_cast<std::size_t>(k)]);
  }
  Var q = critic(i).q.forward(g, critic_input(g, i, obs, act), std::nullopt, track);
  return ad::mean(ad::square(q - g.constant(y))) * 0.5;
}

Var Learner::actor_pg(Graph& g, int i, const Batch& b, const UpdateNoise& n, bool track) {
  const auto order = critic_order(i);
  std::vector<Var> obs(static_cast<std::size_t>(n_)), act(static_cast<std::size_t>(n_));
  for (int k : order) {
    const auto uk = static_cast<std::size_t>(k);
    obs[uk] = g.constant(b.obs[uk]);
    if (k == i) {
      auto mask = own_mask(g, i, obs[uk], masked() ? n.own[uk] : Matrix(), track);
      act[uk] = actor(i).act(g, obs[uk], mask, track);
    } else {
      act[uk] = g.constant(cached_ ? now_cache_[uk] : target_action(k, b.obs[uk], masked() ? &n.target_now[uk] : nullptr));
    }
  }
  Var q = critic(i).q.forward(g, critic_input(g, i, obs, act), std::nullopt, false);
  return ad::mean(q);
}

Var Learner::team_spirit(Graph& g, int i, int j, const Batch& b, bool track_predictor, bool track_target,
                         const UpdateNoise*) {
  if (i == j) throw std::invalid_argument("team_spirit: agent cannot predict itself");
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  Var oi = g.constant(b.obs[ui]);
  Var oj = g.constant(b.obs[uj]);
  std::optional<Var> mi, mj;
  if (masked()) {
    mi = g.constant(ad::one_hot_argmax(actor(i).mask_logits(g, oi, false).value()));
    mj = g.constant(ad::one_hot_argmax(actor(j).mask_logits(g, oj, false).value()));
  }
  Var features = actor(i).policy.trunk(g, oi, mi, track_predictor);
  Var predicted = actor(i).predict(g, head_index(i, j), features, track_predictor);
  Var actual = actor(j).act(g, oj, mj, track_target);
  return -ad::mse(actual, predicted);
}

std::pair<Var, Var> Learner::coach_mask(Graph& g, const Batch& b, const Matrix& noise, bool track) {
  if (!coach_) throw std::logic_error("coach_mask: variant has no coach");
  std::vector<Var> parts;
  for (const Matrix& o : b.obs) parts.push_back(g.constant(o));
  Var logits = coach_->net.forward(g, ad::concat_cols(parts), std::nullopt, track);
  Var sample = ad::gumbel_softmax(logits, noise, cfg_.gumbel_temperature, relaxation_).sample;
  return {sample, logits};
}

Var Learner::ensemble_pg(Graph& g, int i, const Batch& b, Var coach_sample, bool track_actor) {
  const auto order = critic_order(i);
  std::vector<Var> obs(static_cast<std::size_t>(n_)), act(static_cast<std::size_t>(n_));
  for (int k : order) {
    const auto uk = static_cast<std::size_t>(k);
    obs[uk] = g.constant(b.obs[uk]);
    act[uk] = k == i ? actor(i).act(g, obs[uk], coach_sample, track_actor) : g.constant(b.actions[uk]);
  }
  return ad::mean(critic(i).q.forward(g, critic_input(g, i, obs, act), std::nullopt, false));
}

Var Learner::ensemble_agreement(Graph& g, int i, const Batch& b, Var coach_logits, bool track_actor) {
  Var own = actor(i).mask_logits(g, g.constant(b.obs[static_cast<std::size_t>(i)]), track_actor);
  return -ad::mean(ad::kl_from_logits(coach_logits, own));
}

Var Learner::regularizer_step_objective(Graph& g, int i, const Batch& b, const Matrix& coach_noise) {
  auto [sample, logits] = coach_mask(g, b, coach_noise, false);
  std::optional<Var> j;
  if (cfg_.lambda1 > 0) j = ensemble_agreement(g, i, b, logits, true) * cfg_.lambda1;
  if (cfg_.lambda2 > 0) {
    Var epg = ensemble_pg(g, i, b, sample, true) * cfg_.lambda2;
    j = j ? *j + epg : epg;
  }
  if (!j) throw std::logic_error("regularizer_step_objective: both weights are zero");
  return *j;
}

Var Learner::coach_objective(Graph& g, const Batch& b, const Matrix& noise) {
  auto [sample, logits] = coach_mask(g, b, noise, true);
  std::optional<Var> total;
  for (int i = 0; i < n_; ++i) {
    Var term = ensemble_pg(g, i, b, sample, false);
    if (cfg_.lambda3 > 0) term = term + ensemble_agreement(g, i, b, logits, false) * cfg_.lambda3;
    total = total ? *total + term : term;
  }
  return *total * (1.0 / n_);
}

void Learner::step(ad::Adam& opt, const std::vector<Param*>& params) {
  ad::clip_gradient_norm(params, cfg_.grad_clip);
  opt.step();
}

UpdateStats Learner::update(const Batch& batch, Rng& gumbel_rng, Rng& coach_rng) {
  return update(batch, draw_noise(batch.size(), gumbel_rng, coach_rng));
}

UpdateStats Learner::update(const Batch& b, const UpdateNoise& n) {
  UpdateStats stats;
  stats.critic_loss.assign(static_cast<std::size_t>(n_), 0.0);

  next_cache_.clear();
  now_cache_.clear();
  for (int k = 0; k < n_; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    next_cache_.push_back(target_action(k, b.next_obs[uk], masked() ? &n.target_next[uk] : nullptr));
    now_cache_.push_back(target_action(k, b.obs[uk], masked() ? &n.target_now[uk] : nullptr));
  }
  cached_ = true;

  const bool team = uses_team_spirit(cfg_.variant);
  for (int i = 0; i < n_; ++i) {
    Graph gc, ga;
    Var lc = critic_loss(gc, i, b, n);
    Var objective = actor_pg(ga, i, b, n);
    if (team && cfg_.lambda1 > 0)
      for (int j = 0; j < n_; ++j)
        if (j != i) objective = objective + team_spirit(ga, i, j, b, true, false) * cfg_.lambda1;

    if (team && cfg_.lambda2 > 0) {
      for (int j = 0; j < n_; ++j) {
        if (j == i) continue;
        Graph gt;
        Var ts = team_spirit(gt, i, j, b, false, true);
        ad::Adam& opt = actor_opt_[slot(j)];
        opt.zero_grad();
        gt.backward(ts * -cfg_.lambda2);
        step(opt, opt.params());
      }
    }

    ad::Adam& copt = critic_opt_[slot(i)];
    copt.zero_grad();
    gc.backward(lc);
    step(copt, copt.params());

    ad::Adam& aopt = actor_opt_[slot(i)];
    aopt.zero_grad();
    ga.backward(-objective);
    step(aopt, aopt.params());

    stats.critic_loss[static_cast<std::size_t>(i)] = lc.scalar();
  }

  if (uses_coach(cfg_.variant)) {
    if (cfg_.lambda1 > 0 || cfg_.lambda2 > 0) {
      for (int i = 0; i < n_; ++i) {
        Graph g;
        Var j = regularizer_step_objective(g, i, b, n.coach);
        ad::Adam& opt = actor_opt_[slot(i)];
        opt.zero_grad();
        g.backward(-j);
        step(opt, opt.params());
      }
    }
    if (!cfg_.coach_frozen) {
      Graph g;
      Var j = coach_objective(g, b, n.coach);
      coach_opt_->zero_grad();
      g.backward(-j);
      step(*coach_opt_, coach_opt_->params());
    }
  }
  cached_ = false;

  // diagnostics on the post-update weights
  {
    Graph g;
    std::vector<Var> features, actions;
    for (int i = 0; i < n_; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      Var o = g.constant(b.obs[ui]);
      std::optional<Var> m;
      if (masked()) m = g.constant(ad::one_hot_argmax(actor(i).mask_logits(g, o, false).value()));
      features.emplace_back();
      actions.push_back(actor(i).act(g, o, m, false, &features.back()));
    }
    double ts = 0.0;
    int pairs = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        if (i == j) continue;
        Var predicted = actor(i).predict(g, head_index(i, j), features[static_cast<std::size_t>(i)], false);
        ts += ad::mse(actions[static_cast<std::size_t>(j)], predicted).scalar();
        ++pairs;
      }
    stats.team_spirit = pairs > 0 ? ts / pairs : std::numeric_limits<double>::quiet_NaN();
  }
  stats.mask_kl = std::numeric_limits<double>::quiet_NaN();
  if (masked()) {
    Graph g;
    auto [sample, logits] = coach_mask(g, b, n.coach, false);
    double kl = 0.0;
    for (int i = 0; i < n_; ++i) kl += -ensemble_agreement(g, i, b, logits, false).scalar();
    stats.mask_kl = kl / n_;
  }

  soft_update_targets();
  return stats;
}

void Learner::soft_update_targets() {
  for (std::size_t s = 0; s < actors_.size(); ++s) {
    ad::soft_update(target_actors_[s].core_params(), actors_[s].core_params(), cfg_.tau);
    ad::soft_update(target_critics_[s].q.params(), critics_[s].q.params(), cfg_.tau);
  }
}

ActionChoice Learner::act(const env::JointObs& obs, Mode mode, Rng* mask_rng, std::vector<OUNoise>* noise,
                          double noise_scale, Rng* noise_rng) {
  if (static_cast<int>(obs.size()) != n_) throw std::invalid_argument("act: wrong number of observations");
  ActionChoice out;
  for (int i = 0; i < n_; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    Matrix x(1, static_cast<Eigen::Index>(o.size()));
    for (std::size_t k = 0; k < o.size(); ++k) x(0, static_cast<Eigen::Index>(k)) = o[k];
    ActorNet& a = actor(i);
    Matrix mask;
    int mask_id = -1;
    if (masked()) {
      Graph g;
      Matrix logits = a.mask_logits(g, g.constant(x), false).value();
      mask = mask_from_logits(logits, mode, mask_rng);
      mask_id = static_cast<int>(ad::argmax_row(mask, 0));
    }
    Matrix u = a.policy.evaluate(x, masked() ? &mask : nullptr);
    env::Vec action(u.data(), u.data() + u.size());
    if (mode == Mode::Train && noise != nullptr && noise_rng != nullptr) {
      const auto& x_ou = (*noise)[static_cast<std::size_t>(i)].sample(*noise_rng);
      for (std::size_t k = 0; k < action.size(); ++k) action[k] += noise_scale * x_ou[k];
    }
    for (double& v : action) v = std::clamp(v, -1.0, 1.0);
    out.actions.push_back(std::move(action));
    out.mask_ids.push_back(mask_id);
  }
  return out;
}

std::vector<Param*> Learner::actor_params() {
  std::vector<Param*> out;
  for (auto& a : actors_)
    for (Param* p : a.params()) out.push_back(p);
  return out;
}

std::vector<Param*> Learner::all_params() {
  std::vector<Param*> out = actor_params();
  for (auto& a : target_actors_)
    for (Param* p : a.params()) out.push_back(p);
  for (auto& c : critics_)
    for (Param* p : c.q.params()) out.push_back(p);
  for (auto& c : target_critics_)
    for (Param* p : c.q.params()) out.push_back(p);
  if (coach_)
    for (Param* p : coach_->net.params()) out.push_back(p);
  return out;
}

}  // namespace marl::agents
