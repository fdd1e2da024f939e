#include <cmath>
#include <map>

#include "doctest.h"
#include "marl/agents/learner.hpp"
#include "marl/autograd/gradcheck.hpp"
#include "marl/autograd/ops.hpp"
#include "marl/autograd/optim.hpp"

using namespace marl;
using namespace marl::agents;
using ad::finite_diff_check;

namespace {

TrainConfig small_config(Variant v, int n = 3) {
  TrainConfig c;
  c.variant = v;
  c.n_agents = n;
  c.seed = 11;
  c.hidden = 8;
  c.mask_k = 4;
  c.tau = 0.1;
  c.actor_lr = 1e-3;
  c.batch_size = 6;
  if (uses_team_spirit(v)) {
    c.lambda1 = 0.3;
    c.lambda2 = v == Variant::AgentModelling ? 0.0 : 0.2;
  }
  if (v == Variant::CoachReg) {
    c.lambda1 = 0.3;
    c.lambda2 = 0.2;
    c.lambda3 = 0.7;
  }
  if (v == Variant::PolicyMask) c.coach_frozen = true;
  return c;
}

std::vector<int> obs_dims_for(const TrainConfig& c) {
  if (c.variant == Variant::Sharing) return std::vector<int>(static_cast<std::size_t>(c.n_agents), 4);
  std::vector<int> d;
  for (int i = 0; i < c.n_agents; ++i) d.push_back(3 + i);
  return d;
}

std::vector<int> act_dims_for(const TrainConfig& c) { return std::vector<int>(static_cast<std::size_t>(c.n_agents), 2); }

Batch random_batch(const std::vector<int>& od, const std::vector<int>& ad_, Eigen::Index rows, std::uint64_t seed) {
  Rng rng(seed);
  auto rnd = [&](Eigen::Index r, Eigen::Index c, double lo, double hi) {
    Matrix m(r, c);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform(rng, lo, hi);
    return m;
  };
  Batch b;
  for (std::size_t i = 0; i < od.size(); ++i) {
    b.obs.push_back(rnd(rows, od[i], -1, 1));
    b.actions.push_back(rnd(rows, ad_[i], -1, 1));
    b.rewards.push_back(rnd(rows, 1, -2, 2));
    b.next_obs.push_back(rnd(rows, od[i], -1, 1));
  }
  b.not_terminal = Matrix::Ones(rows, 1);
  b.not_terminal(0, 0) = 0.0;
  return b;
}

struct Fixture {
  TrainConfig cfg;
  Learner learner;
  Batch batch;
  UpdateNoise noise;
  explicit Fixture(Variant v, int n = 3)
      : cfg(small_config(v, n)), learner(cfg, obs_dims_for(cfg), act_dims_for(cfg)),
        batch(random_batch(obs_dims_for(cfg), act_dims_for(cfg), 6, 99)) {
    Rng g(5), c(6);
    noise = learner.draw_noise(6, g, c);
    learner.set_relaxation(ad::Relaxation::Soft);
  }
};

void check_grad(const std::function<Var(Graph&)>& fn, const std::vector<Param*>& params, double tol = 1e-4) {
  auto rep = finite_diff_check(fn, params, 1e-6, 1e-7);
  INFO(rep.worst_param << "[" << rep.worst_index << "] analytic=" << rep.analytic << " numeric=" << rep.numeric);
  CHECK(rep.max_rel_error < tol);
  for (Param* p : params) p->grad.setZero();
  Graph g;
  g.backward(fn(g));
  CHECK(ad::gradient_norm(params) > 1e-8);
}

std::vector<Param*> concat(std::vector<Param*> a, const std::vector<Param*>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Matrix> snapshot(Learner& l) {
  std::vector<Matrix> out;
  for (Param* p : l.all_params()) out.push_back(p->data);
  return out;
}

}  // namespace

TEST_CASE("critic loss gradient matches finite differences") {
  for (Variant v : {Variant::DDPG, Variant::MADDPG, Variant::Sharing, Variant::CoachReg}) {
    Fixture f(v);
    for (int i = 0; i < f.cfg.n_agents; ++i)
      check_grad([&](Graph& g) { return f.learner.critic_loss(g, i, f.batch, f.noise); }, f.learner.critic(i).q.params());
  }
}

TEST_CASE("policy gradient objective matches finite differences") {
  for (Variant v : {Variant::DDPG, Variant::MADDPG, Variant::Sharing, Variant::CoachReg}) {
    Fixture f(v);
    for (int i = 0; i < f.cfg.n_agents; ++i)
      check_grad([&](Graph& g) { return f.learner.actor_pg(g, i, f.batch, f.noise); }, f.learner.actor(i).core_params());
  }
}

TEST_CASE("team-spirit gradients match finite differences") {
  Fixture f(Variant::TeamReg);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      auto predictor = concat(f.learner.actor(i).policy.params(), f.learner.actor(i).head_params());
      check_grad([&](Graph& g) { return f.learner.team_spirit(g, i, j, f.batch, true, false); }, predictor);
      check_grad([&](Graph& g) { return f.learner.team_spirit(g, i, j, f.batch, false, true); },
                 f.learner.actor(j).policy.params());
    }
}

TEST_CASE("combined actor objective matches finite differences") {
  Fixture f(Variant::TeamReg);
  auto fn = [&](Graph& g) {
    Var j = f.learner.actor_pg(g, 1, f.batch, f.noise);
    for (int k : {0, 2}) j = j + f.learner.team_spirit(g, 1, k, f.batch, true, false) * f.cfg.lambda1;
    return j;
  };
  check_grad(fn, f.learner.actor(1).params());
}

TEST_CASE("coach-regularization gradients match finite differences") {
  Fixture f(Variant::CoachReg);
  for (int i = 0; i < 3; ++i) {
    auto mask = f.learner.actor(i).mask_layer->params();
    check_grad(
        [&](Graph& g) {
          auto [s, logits] = f.learner.coach_mask(g, f.batch, f.noise.coach, false);
          return f.learner.ensemble_agreement(g, i, f.batch, logits, true);
        },
        mask);
    check_grad(
        [&](Graph& g) {
          auto [s, logits] = f.learner.coach_mask(g, f.batch, f.noise.coach, false);
          return f.learner.ensemble_pg(g, i, f.batch, s, true);
        },
        f.learner.actor(i).policy.params());
    check_grad([&](Graph& g) { return f.learner.regularizer_step_objective(g, i, f.batch, f.noise.coach); },
               f.learner.actor(i).core_params());
  }
  check_grad([&](Graph& g) { return f.learner.coach_objective(g, f.batch, f.noise.coach); },
             f.learner.coach()->net.params());
}

TEST_CASE("ensemble agreement is minus the mean KL") {
  Fixture f(Variant::CoachReg);
  Graph g;
  auto [s, logits] = f.learner.coach_mask(g, f.batch, f.noise.coach, false);
  Var own = f.learner.actor(0).mask_logits(g, g.constant(f.batch.obs[0]), false);
  Matrix p = ad::softmax(logits).value(), q = ad::softmax(own).value();
  double kl = 0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index k = 0; k < p.cols(); ++k) kl += p(r, k) * std::log(p(r, k) / q(r, k));
  kl /= static_cast<double>(p.rows());
  CHECK(f.learner.ensemble_agreement(g, 0, f.batch, logits, false).scalar() == doctest::Approx(-kl).epsilon(1e-10));
  CHECK(kl > 0.0);
}

TEST_CASE("critic loss closed form with constant networks") {
  Fixture f(Variant::MADDPG);
  auto constant_net = [](ad::Mlp& m, double out) {
    for (Param* p : m.params())
      if (p->name.find("ln_gain") == std::string::npos) p->data.setZero();
    m.params().back()->data.setConstant(out);
  };
  constant_net(f.learner.critic(0).q, 1.5);
  constant_net(f.learner.target_critic(0).q, -2.0);
  Graph g;
  double loss = f.learner.critic_loss(g, 0, f.batch, f.noise).scalar();
  double expected = 0;
  for (Eigen::Index r = 0; r < 6; ++r) {
    double y = f.batch.rewards[0](r, 0) + 0.95 * f.batch.not_terminal(r, 0) * -2.0;
    expected += 0.5 * (1.5 - y) * (1.5 - y);
  }
  CHECK(loss == doctest::Approx(expected / 6).epsilon(1e-12));
}

TEST_CASE("objectives never write into target networks") {
  for (Variant v : {Variant::MADDPG, Variant::TeamReg, Variant::CoachReg}) {
    Fixture f(v);
    f.learner.set_relaxation(ad::Relaxation::StraightThrough);
    std::vector<Param*> targets;
    for (int i = 0; i < 3; ++i) {
      targets = concat(targets, f.learner.target_actor(i).params());
      targets = concat(targets, f.learner.target_critic(i).q.params());
    }
    for (Param* p : targets) p->grad.setZero();
    f.learner.update(f.batch, f.noise);
    for (Param* p : targets) {
      INFO(p->name);
      CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("soft update closes the target gap geometrically") {
  Fixture f(Variant::MADDPG);
  Param& online = *f.learner.critic(0).q.params().front();
  Param& target = *f.learner.target_critic(0).q.params().front();
  online.data.array() += 1.0;
  const Matrix gap0 = online.data - target.data;
  for (int n = 1; n <= 20; ++n) {
    f.learner.soft_update_targets();
    const Matrix gap = online.data - target.data;
    CHECK((gap - gap0 * std::pow(0.9, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("targets start as exact copies") {
  Fixture f(Variant::CoachReg);
  for (int i = 0; i < 3; ++i) {
    auto a = f.learner.actor(i).core_params(), t = f.learner.target_actor(i).core_params();
    REQUIRE(a.size() == t.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k]->data == t[k]->data);
      CHECK(t[k]->name == "target." + a[k]->name);
    }
  }
}

TEST_CASE("gradient steps move objectives the right way on a frozen batch") {
  SUBCASE("critic loss decreases") {
    Fixture f(Variant::MADDPG);
    f.learner.set_relaxation(ad::Relaxation::StraightThrough);
    Graph g0;
    const double before = f.learner.critic_loss(g0, 0, f.batch, f.noise).scalar();
    for (int k = 0; k < 30; ++k) f.learner.update(f.batch, f.noise);
    Graph g1;
    CHECK(f.learner.critic_loss(g1, 0, f.batch, f.noise).scalar() < before);
  }
  SUBCASE("policy objective increases under a fixed critic") {
    Fixture f(Variant::MADDPG);
    Graph g0;
    const double before = f.learner.actor_pg(g0, 1, f.batch, f.noise).scalar();
    ad::Adam opt(f.learner.actor(1).core_params(), 1e-3);
    for (int k = 0; k < 20; ++k) {
      Graph g;
      opt.zero_grad();
      g.backward(-f.learner.actor_pg(g, 1, f.batch, f.noise));
      opt.step();
    }
    Graph g1;
    CHECK(f.learner.actor_pg(g1, 1, f.batch, f.noise).scalar() > before);
  }
  SUBCASE("team-spirit error shrinks under TeamReg updates") {
    Fixture f(Variant::TeamReg);
    f.learner.set_relaxation(ad::Relaxation::StraightThrough);
    f.learner.update(f.batch, f.noise);
    double first = f.learner.update(f.batch, f.noise).team_spirit;
    double last = first;
    for (int k = 0; k < 40; ++k) last = f.learner.update(f.batch, f.noise).team_spirit;
    CHECK(last < first);
  }
}

TEST_CASE("mask sampling distribution") {
  Matrix logits(1, 4);
  logits << std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0);
  CHECK(ad::argmax_row(mask_from_logits(logits, Mode::Eval, nullptr), 0) == 3);
  Rng rng(17);
  std::array<int, 4> counts{};
  const int n = 200000;
  for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(ad::argmax_row(mask_from_logits(logits, Mode::Train, &rng), 0))];
  for (int k = 0; k < 4; ++k) CHECK(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n == doctest::Approx((k + 1) / 10.0).epsilon(0.03));
}

TEST_CASE("acting") {
  Fixture f(Variant::CoachReg);
  env::JointObs obs{{0.1, 0.2, 0.3}, {0.0, -0.5, 0.5, 0.2}, {1, 1, 1, 1, 1}};
  ActionChoice a = f.learner.act(obs, Mode::Eval, nullptr, nullptr, 0, nullptr);
  ActionChoice b = f.learner.act(obs, Mode::Eval, nullptr, nullptr, 0, nullptr);
  CHECK(a.actions == b.actions);
  for (int id : a.mask_ids) CHECK((id >= 0 && id < 4));
  for (const auto& u : a.actions)
    for (double x : u) CHECK(std::abs(x) <= 1.0);

  Fixture m(Variant::MADDPG);
  std::vector<OUNoise> ou(3, OUNoise(2));
  Rng nr(1);
  ActionChoice eval = m.learner.act(obs, Mode::Eval, nullptr, nullptr, 0, nullptr);
  ActionChoice quiet = m.learner.act(obs, Mode::Train, nullptr, &ou, 0.0, &nr);
  CHECK(eval.actions == quiet.actions);
  CHECK(eval.mask_ids == std::vector<int>{-1, -1, -1});
  CHECK_THROWS(m.learner.act({{0.1}}, Mode::Eval, nullptr, nullptr, 0, nullptr));
}

TEST_CASE("identical seeds give identical updates") {
  auto run = [](Variant v) {
    Fixture f(v);
    f.learner.set_relaxation(ad::Relaxation::StraightThrough);
    Rng g(3), c(4);
    for (int k = 0; k < 3; ++k) f.learner.update(f.batch, g, c);
    return snapshot(f.learner);
  };
  for (Variant v : {Variant::MADDPG, Variant::TeamReg, Variant::CoachReg}) CHECK(run(v) == run(v));
}

TEST_CASE("variant reductions are exact at the learner level") {
  auto run = [](TrainConfig cfg) {
    Learner l(cfg, obs_dims_for(cfg), act_dims_for(cfg));
    Batch b = random_batch(obs_dims_for(cfg), act_dims_for(cfg), 6, 99);
    Rng g(3), c(4);
    for (int k = 0; k < 4; ++k) l.update(b, g, c);
    std::vector<Matrix> out;
    for (int i = 0; i < cfg.n_agents; ++i)
      for (Param* p : l.actor(i).params()) out.push_back(p->data);
    return out;
  };
  TrainConfig maddpg = small_config(Variant::MADDPG);
  TrainConfig teamreg = small_config(Variant::TeamReg);
  teamreg.lambda1 = teamreg.lambda2 = 0.0;
  CHECK(run(maddpg) == run(teamreg));

  TrainConfig am = small_config(Variant::AgentModelling);
  TrainConfig tr = small_config(Variant::TeamReg);
  tr.lambda2 = 0.0;
  CHECK(run(am) == run(tr));

  TrainConfig pm = small_config(Variant::PolicyMask);
  TrainConfig cr = small_config(Variant::CoachReg);
  cr.lambda1 = cr.lambda2 = cr.lambda3 = 0.0;
  cr.coach_frozen = true;
  CHECK(run(pm) == run(cr));

  TrainConfig full = small_config(Variant::TeamReg);
  CHECK(run(full) != run(maddpg));
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(4, {2, 1}, {1, 1});
  auto make = [](double v) {
    Transition t;
    t.obs = {{v, v}, {v}};
    t.actions = {{-v}, {v}};
    t.rewards = {v, 2 * v};
    t.next_obs = {{v + 1, v + 1}, {v + 1}};
    t.terminal = v > 4;
    return t;
  };
  for (int k = 0; k < 3; ++k) buf.add(make(k));
  CHECK(buf.size() == 3);
  CHECK(buf.at(2).rewards == std::vector<double>{2.0, 4.0});
  for (int k = 3; k < 6; ++k) buf.add(make(k));
  CHECK(buf.size() == 4);
  std::map<double, int> seen;
  for (std::size_t k = 0; k < 4; ++k) ++seen[buf.at(k).obs[1][0]];
  CHECK(seen.count(0.0) == 0);
  CHECK(seen.count(1.0) == 0);
  CHECK(seen.count(5.0) == 1);

  Batch b = buf.gather({0, 1});
  CHECK(b.obs[0].cols() == 2);
  CHECK(b.rewards[1](0, 0) == 2 * buf.at(0).rewards[0]);
  CHECK(b.not_terminal(0, 0) == (buf.at(0).terminal ? 0.0 : 1.0));
  CHECK_THROWS(buf.add(Transition{{{1.0}}, {{1.0}}, {1.0}, {{1.0}}, false}));

  ReplayBuffer big(10, {1}, {1});
  for (int k = 0; k < 10; ++k) big.add(Transition{{{double(k)}}, {{0.0}}, {0.0}, {{0.0}}, false});
  Rng rng(8);
  std::array<int, 10> counts{};
  const int n = 100000;
  for (std::size_t idx : big.sample_indices(n, rng)) ++counts[idx];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  CHECK(chi2 < 27.9);  // 99.9th percentile, 9 dof
}

TEST_CASE("exploration noise") {
  CHECK(noise_scale_at(0, 100, 1.2) == 1.2);
  CHECK(noise_scale_at(49, 100, 1.2) == 1.2);
  CHECK(noise_scale_at(99, 100, 1.2) == doctest::Approx(0.0));
  CHECK(noise_scale_at(75, 100, 1.0) == doctest::Approx(0.49).epsilon(0.02));

  OUNoise ou(1);
  Rng rng(2);
  double s = 0, s2 = 0;
  const int n = 400000;
  for (int k = 0; k < 1000; ++k) ou.sample(rng);
  for (int k = 0; k < n; ++k) {
    double x = ou.sample(rng)[0];
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(0.04 / (1 - 0.85 * 0.85)).epsilon(0.03));
  ou.reset();
  CHECK(ou.state()[0] == 0.0);
}

TEST_CASE("config json round trip and validation") {
  TrainConfig c = small_config(Variant::CoachReg);
  TrainConfig back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  c.seed = 12;
  CHECK(config_hash(back) != config_hash(c));
  CHECK(hex64(0xabcULL).size() == 16);

  nlohmann::json j = to_json(c);
  j["unknown_key"] = 1;
  CHECK_THROWS(config_from_json(j));

  TrainConfig bad = small_config(Variant::AgentModelling);
  bad.lambda2 = 0.1;
  CHECK_THROWS(bad.validate());
  TrainConfig pm = small_config(Variant::PolicyMask);
  pm.coach_frozen = false;
  CHECK_THROWS(pm.validate());
  CHECK(parse_variant("agent-modelling") == Variant::AgentModelling);
  CHECK_THROWS(parse_variant("qmix"));
}

TEST_CASE("discrete team spirit") {
  CHECK(team_spirit_discrete({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(team_spirit_discrete({1.0, 0.0}, {0.5, 0.5}) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    double a = uniform(rng, 0.01, 1), b = uniform(rng, 0.01, 1);
    CHECK(team_spirit_discrete({a, 1 - a}, {b, 1 - b}) <= 0.0);
  }
  Param t("true", Matrix::Random(5, 3)), q("pred", Matrix::Random(5, 3));
  check_grad([&](Graph& g) { return team_spirit_discrete(g.param(t), g.param(q)); }, {&t, &q});
  Graph g;
  CHECK(team_spirit_discrete(g.constant(t.data), g.constant(t.data)).scalar() == doctest::Approx(0.0));
}

TEST_CASE("critic blind to actions gives the actor no gradient") {
  Fixture f(Variant::MADDPG);
  Param& w0 = *f.learner.critic(0).q.params().front();
  w0.data.bottomRows(6).setZero();  // rows of the three 2-d actions
  for (Param* p : f.learner.actor(0).params()) p->grad.setZero();
  Graph g;
  g.backward(f.learner.actor_pg(g, 0, f.batch, f.noise));
  CHECK(ad::gradient_norm(f.learner.actor(0).params()) == 0.0);
}

TEST_CASE("updates keep parameters finite and clip gradients") {
  for (Variant v : {Variant::MADDPG, Variant::Sharing, Variant::TeamReg, Variant::CoachReg, Variant::DDPG}) {
    Fixture f(v);
    f.learner.set_relaxation(ad::Relaxation::StraightThrough);
    for (int k = 0; k < 3; ++k) f.learner.update(f.batch, f.noise);
    for (Param* p : f.learner.all_params()) CHECK(p->data.allFinite());
    for (int i = 0; i < 3; ++i) {
      CHECK(ad::gradient_norm(f.learner.actor(i).params()) <= 0.5 + 1e-12);
      CHECK(ad::gradient_norm(f.learner.critic(i).q.params()) <= 0.5 + 1e-12);
    }
    if (f.learner.coach()) CHECK(ad::gradient_norm(f.learner.coach()->net.params()) <= 0.5 + 1e-12);
  }
}

TEST_CASE("agreement with the coach shrinks the KL on a frozen batch") {
  Fixture f(Variant::CoachReg);
  auto mask = f.learner.actor(1).mask_layer->params();
  ad::Adam opt(mask, 1e-2);
  auto kl = [&] {
    Graph g;
    auto [s, logits] = f.learner.coach_mask(g, f.batch, f.noise.coach, false);
    return -f.learner.ensemble_agreement(g, 1, f.batch, logits, false).scalar();
  };
  double prev = kl();
  for (int k = 0; k < 50; ++k) {
    Graph g;
    auto [s, logits] = f.learner.coach_mask(g, f.batch, f.noise.coach, false);
    opt.zero_grad();
    g.backward(-f.learner.ensemble_agreement(g, 1, f.batch, logits, true));
    opt.step();
    const double now = kl();
    CHECK(now < prev);
    prev = now;
  }

  Graph g;
  Var same = g.constant(Matrix::Random(4, 4));
  CHECK(team_spirit_discrete(same, same).scalar() == 0.0);
}
