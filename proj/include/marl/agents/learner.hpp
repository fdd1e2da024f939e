#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "marl/agents/config.hpp"
#include "marl/agents/nets.hpp"
#include "marl/agents/noise.hpp"
#include "marl/agents/replay.hpp"
#include "marl/autograd/optim.hpp"
#include "marl/autograd/stochastic.hpp"

namespace marl::agents {

enum class Mode { Train, Eval };

// All Gumbel draws consumed by one learning step. Freezing them makes every objective a
// deterministic function of the parameters.
struct UpdateNoise {
  std::vector<Matrix> own;          // own mask in the policy-gradient step
  std::vector<Matrix> target_next;  // target masks on o'
  std::vector<Matrix> target_now;   // target masks on o (teammates in the policy gradient)
  Matrix coach;
};

struct UpdateStats {
  std::vector<double> critic_loss;
  double team_spirit = 0.0;  // mean MSE between teammate actions and their predictions
  double mask_kl = 0.0;      // mean KL(coach || agent) over agents, NaN when unmasked
};

struct ActionChoice {
  env::JointAction actions;
  std::vector<int> mask_ids;  // -1 when unmasked
};

// Weights a differentiable objective should carry gradient into.
struct Track {
  bool actor = true;
  bool critic = false;
};

class Learner {
 public:
  Learner(const TrainConfig& cfg, std::vector<int> obs_dims, std::vector<int> action_dims);
  Learner(const Learner&) = delete;
  Learner& operator=(const Learner&) = delete;

  const TrainConfig& config() const { return cfg_; }
  int n_agents() const { return n_; }
  bool sharing() const { return cfg_.variant == Variant::Sharing; }
  bool masked() const { return uses_masks(cfg_.variant); }

  ActorNet& actor(int i) { return actors_[slot(i)]; }
  ActorNet& target_actor(int i) { return target_actors_[slot(i)]; }
  CriticNet& critic(int i) { return critics_[slot(i)]; }
  CriticNet& target_critic(int i) { return target_critics_[slot(i)]; }
  CoachNet* coach() { return coach_ ? &*coach_ : nullptr; }

  // Straight-through for training; Soft relaxes every stochastic mask for gradient checks.
  void set_relaxation(ad::Relaxation r) { relaxation_ = r; }

  UpdateNoise draw_noise(Eigen::Index batch, Rng& gumbel_rng, Rng& coach_rng) const;
  UpdateStats update(const Batch& batch, Rng& gumbel_rng, Rng& coach_rng);
  UpdateStats update(const Batch& batch, const UpdateNoise& noise);
  void soft_update_targets();

  ActionChoice act(const env::JointObs& obs, Mode mode, Rng* mask_rng, std::vector<OUNoise>* noise,
                   double noise_scale, Rng* noise_rng);

  // ---- objectives; scalars, to be minimised (loss) or maximised (J) ----
  // Targets are computed outside the graph.
  Var critic_loss(Graph& g, int i, const Batch& b, const UpdateNoise& n, bool track = true);
  Var actor_pg(Graph& g, int i, const Batch& b, const UpdateNoise& n, bool track = true);
  // -MSE(mu_j(o_j), prediction of agent i for j); gradient flows where requested.
  Var team_spirit(Graph& g, int i, int j, const Batch& b, bool track_predictor, bool track_target,
                  const UpdateNoise* n = nullptr);
  // Graph node for the coach sample and its logits (track = coach receives gradient).
  std::pair<Var, Var> coach_mask(Graph& g, const Batch& b, const Matrix& noise, bool track);
  Var ensemble_pg(Graph& g, int i, const Batch& b, Var coach_sample, bool track_actor);
  Var ensemble_agreement(Graph& g, int i, const Batch& b, Var coach_logits, bool track_actor);
  Var coach_objective(Graph& g, const Batch& b, const Matrix& noise);
  Var regularizer_step_objective(Graph& g, int i, const Batch& b, const Matrix& coach_noise);

  // Parameters with stable names, for checkpoints.
  std::vector<Param*> all_params();
  std::vector<Param*> actor_params();  // what evaluation needs

 private:
  std::size_t slot(int i) const { return sharing() ? 0 : static_cast<std::size_t>(i); }
  int head_index(int i, int j) const { return j < i ? j : j - 1; }
  std::vector<int> critic_order(int i) const;
  Var critic_input(Graph& g, int i, const std::vector<Var>& obs, const std::vector<Var>& actions);
  Matrix target_action(int j, const Matrix& obs, const Matrix* noise);
  std::optional<Var> own_mask(Graph& g, int i, Var obs, const Matrix& noise, bool track);
  Var constant_mask(Graph& g, const Matrix& hard) { return g.constant(hard); }

  void step(ad::Adam& opt, const std::vector<Param*>& params);

  TrainConfig cfg_;
  int n_;
  std::vector<int> obs_dims_, action_dims_;
  ad::Relaxation relaxation_ = ad::Relaxation::StraightThrough;

  std::vector<ActorNet> actors_, target_actors_;
  std::vector<CriticNet> critics_, target_critics_;
  std::optional<CoachNet> coach_;
  std::vector<ad::Adam> actor_opt_, critic_opt_;
  std::optional<ad::Adam> coach_opt_;

  // Target actions for the batch being updated; filled by update() only.
  bool cached_ = false;
  std::vector<Matrix> next_cache_, now_cache_;
};

// Discrete team spirit: -mean KL(softmax(true_logits) || softmax(pred_logits)).
Var team_spirit_discrete(Var true_logits, Var pred_logits);
double team_spirit_discrete(const std::vector<double>& p_true, const std::vector<double>& p_pred);

// Hard mask rows: argmax of logits (eval) or a Gumbel sample (train).
Matrix mask_from_logits(const Matrix& logits, Mode mode, Rng* rng);

}  // namespace marl::agents
