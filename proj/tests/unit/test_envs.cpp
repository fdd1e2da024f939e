#include <cmath>
#include <set>

#include "doctest.h"
#include "marl/envs/chain.hpp"
#include "marl/envs/particle.hpp"

using namespace marl;
using namespace marl::env;

namespace {

JointAction random_actions(int n, Rng& rng) {
  JointAction a;
  for (int i = 0; i < n; ++i) a.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
  return a;
}

}  // namespace

TEST_CASE("coordination map") {
  CHECK(coordination_map(1, 1) == std::pair{1, 1});
  CHECK(coordination_map(0, 1) == std::pair{0, 0});
  CHECK(coordination_map(0, 0) == std::pair{0, 1});
  CHECK(coordination_map(1, 0) == std::pair{1, 0});
}

TEST_CASE("chain step") {
  ChainGame g(5, false, 50);
  ChainState s0{};
  CHECK(g.transition(s0, 0, 0).state.position == 1);
  CHECK(g.transition(s0, 0, 1).state.position == 0);
  CHECK(g.transition(s0, 1, 1).state.position == 0);  // clamped
  CHECK(g.transition(ChainState{3, 0}, 1, 1).state.position == 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(g.transition(s0, a, b).reward == -1.0);
  auto last = g.transition(ChainState{4, 0}, 0, 0);
  CHECK(last.done);
  CHECK(last.terminal);
  auto budget = g.transition(ChainState{0, 49}, 0, 1);
  CHECK(budget.done);
  CHECK_FALSE(budget.terminal);
}

TEST_CASE("chain transition rules") {
  ChainGame plain(6, false, 100);
  ChainGame mapped(6, true, 100);
  for (int p = 0; p < 6; ++p) {
    ChainState s{p, 0};
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a2 = 0; a2 < 2; ++a2) {
        const bool moved = plain.transition(s, a1, a2).state.position != p || (p == 0 && a1 == 1 && a2 == 1);
        CHECK(moved == (a1 == a2));
      }
    // agent 2 disagreeing: same next state whatever agent 1 does
    CHECK(mapped.transition(s, 0, 0).state.position == mapped.transition(s, 1, 0).state.position);
  }
}

TEST_CASE("integrate") {
  PhysicsConfig cfg;
  World w;
  Entity e;
  e.max_speed = 0.0;
  e.accel = 0.4;
  w.entities.push_back(e);
  std::vector<Vec2> none(1, Vec2::Zero());

  SUBCASE("zero force at rest stays put") {
    integrate(w, none, none, cfg);
    CHECK(w.entities[0].pos == Vec2::Zero());
  }
  SUBCASE("constant force reaches closed-form terminal speed") {
    const double c = 1.0 * e.accel * cfg.dt;
    std::vector<Vec2> push(1, Vec2(1.0, 0.0));
    for (int n = 1; n <= 200; ++n) {
      integrate(w, push, none, cfg);
      w.entities[0].pos.setZero();  // stay off the walls
      const double expected = c * (1.0 - std::pow(1.0 - cfg.damping, n)) / cfg.damping;
      CHECK(w.entities[0].vel.x() == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(w.entities[0].vel.x() == doctest::Approx(c / cfg.damping).epsilon(1e-9));
  }
  SUBCASE("wall keeps entity inside") {
    w.entities[0].pos = Vec2(0.94, -0.94);
    w.entities[0].vel = Vec2(3.0, -3.0);
    integrate(w, none, none, cfg);
    const Entity& r = w.entities[0];
    CHECK(std::abs(r.pos.x()) <= 1.0 - r.radius);
    CHECK(std::abs(r.pos.y()) <= 1.0 - r.radius);
    CHECK(r.vel.x() <= 0.0);
    CHECK(r.vel.y() >= 0.0);
  }
  SUBCASE("damping strictly lowers speed without forces") {
    w.entities[0].vel = Vec2(0.3, 0.2);
    double prev = w.entities[0].vel.norm();
    for (int n = 0; n < 20; ++n) {
      integrate(w, none, none, cfg);
      w.entities[0].pos.setZero();
      CHECK(w.entities[0].vel.norm() < prev);
      prev = w.entities[0].vel.norm();
    }
  }
  SUBCASE("speed cap") {
    w.entities[0].max_speed = 0.5;
    w.entities[0].accel = 100.0;
    std::vector<Vec2> push(1, Vec2(1.0, 1.0));
    integrate(w, push, none, cfg);
    CHECK(w.entities[0].vel.norm() <= 0.5 + 1e-12);
  }
}

TEST_CASE("spread reward") {
  Rng rng(1);
  SpreadTask t(3);
  t.reset(rng);
  auto& e = t.world().entities;
  SUBCASE("all covered") {
    e[3].pos = Vec2(-0.5, 0.0);
    e[4].pos = Vec2(0.0, 0.5);
    e[5].pos = Vec2(0.5, 0.0);
    for (int i = 0; i < 3; ++i) e[static_cast<std::size_t>(i)].pos = e[static_cast<std::size_t>(3 + i)].pos;
    CHECK(t.team_reward() == 3.0);
  }
  SUBCASE("stacked on one landmark") {
    e[3].pos = Vec2(0.2, 0.2);
    e[4].pos = Vec2(-0.7, 0.7);
    e[5].pos = Vec2(0.7, -0.7);
    for (int i = 0; i < 3; ++i) e[static_cast<std::size_t>(i)].pos = Vec2(0.2, 0.2);
    CHECK(t.team_reward() == -2.0);
  }
  SUBCASE("nobody near anything") {
    for (int l = 0; l < 3; ++l) e[static_cast<std::size_t>(3 + l)].pos = Vec2(0.9, -0.9 + 0.5 * l);
    e[0].pos = Vec2(-0.8, 0.0);
    e[1].pos = Vec2(-0.4, 0.0);
    e[2].pos = Vec2(0.0, 0.0);
    CHECK(t.team_reward() == 0.0);
  }
}

TEST_CASE("spread reward codomain") {
  Rng rng(3);
  SpreadTask t(3);
  for (int ep = 0; ep < 20; ++ep) {
    t.reset(rng);
    for (int s = 0; s < 100; ++s) {
      StepResult r = t.step(random_actions(3, rng), rng);
      CHECK(r.rewards[0] >= -3.0);
      CHECK(r.rewards[0] <= 3.0);
      CHECK(r.done == (s == 99));
    }
  }
}

TEST_CASE("observation layout") {
  Rng rng(2);
  SpreadTask t(3);
  JointObs o = t.reset(rng);
  CHECK(o[0].size() == 14u);
  CHECK(t.obs_dims() == std::vector<int>{14, 14, 14});
  for (int n = 4; n <= 6; ++n) CHECK(SpreadTask(n).obs_dims()[0] == 4 + 2 * (2 * n - 1));

  for (auto& e : t.world().entities) e.pos.setZero(), e.vel.setZero();
  const JointObs zero = t.observe_all();
  for (double v : zero[1]) CHECK(v == 0.0);

  t.reset(rng);
  JointObs a = t.observe_all();
  for (auto& e : t.world().entities) e.pos += Vec2(0.125, -0.25);
  JointObs b = t.observe_all();
  for (int i = 0; i < 3; ++i) {
    const auto& oa = a[static_cast<std::size_t>(i)];
    const auto& ob = b[static_cast<std::size_t>(i)];
    CHECK(ob[0] == doctest::Approx(oa[0] + 0.125));
    CHECK(ob[1] == doctest::Approx(oa[1] - 0.25));
    for (std::size_t k = 2; k < oa.size(); ++k) CHECK(ob[k] == doctest::Approx(oa[k]).epsilon(1e-12));
  }

  CHECK(BounceTask().obs_dims() == std::vector<int>{10, 10});
  CHECK(CompromiseTask().obs_dims() == std::vector<int>{10, 10});
  CHECK(ChaseTask().obs_dims() == std::vector<int>{8, 8});
}

TEST_CASE("compromise observation order") {
  Rng rng(4);
  CompromiseTask t;
  t.reset(rng);
  auto& e = t.world().entities;
  for (auto& x : e) x.pos.setZero();
  e[1].pos = Vec2(0.1, 0.0);
  e[2].pos = Vec2(0.2, 0.0);
  e[3].pos = Vec2(0.3, 0.0);
  Vec o = t.observe_all()[0];
  CHECK(o[4] == doctest::Approx(0.1));
  CHECK(o[6] == doctest::Approx(0.2));
  CHECK(o[8] == doctest::Approx(0.3));
}

TEST_CASE("bounce") {
  Rng rng(5);
  SUBCASE("no interception gives zero return") {
    BounceTask t;
    t.reset(rng);
    auto& e = t.world().entities;
    e[0].pos = Vec2(-0.9, -0.5);
    e[1].pos = Vec2(-0.8, -0.5);
    e[BounceTask::kBall].pos.x() = 0.5;
    double total = 0.0;
    JointAction still{{0.0, 0.0}, {0.0, 0.0}};
    for (int s = 0; s < 100; ++s) total += t.step(still, rng).rewards[0];
    CHECK(total == 0.0);
    CHECK_FALSE(t.bounced());
  }
  SUBCASE("reflection aimed at the target centre pays 10") {
    BounceTask t;
    t.reset(rng);
    const Vec2 centre = t.world().entities[BounceTask::kTarget].pos;
    const Vec2 origin(centre.x() - 0.4, -0.3);
    CHECK(t.classify_bounce(origin, centre - origin) == 10.0);
    CHECK(t.classify_bounce(Vec2(0.0, 0.0), Vec2(0.0, -1.0)) == 0.1);
  }
  SUBCASE("top and side exits") {
    BounceTask t;
    t.reset(rng);
    t.world().entities[BounceTask::kTarget].pos = Vec2(-0.9, 0.5);
    CHECK(t.classify_bounce(Vec2(0.5, 0.0), Vec2(0.05, 1.0)) == 0.2);
    CHECK(t.classify_bounce(Vec2(0.5, 0.0), Vec2(1.0, 0.1)) == 0.1);
  }
  SUBCASE("paddle under the ball bounces it and ends the episode") {
    BounceTask t;
    t.reset(rng);
    auto& e = t.world().entities;
    e[BounceTask::kBall].pos.x() = 0.0;
    JointAction still{{0.0, 0.0}, {0.0, 0.0}};
    StepResult r;
    double total = 0.0;
    for (int s = 0; s < 100; ++s) {
      e[0].pos = Vec2(-0.2, -0.3);
      e[1].pos = Vec2(0.2, -0.3);
      e[0].vel.setZero();
      e[1].vel.setZero();
      r = t.step(still, rng);
      total += r.rewards[0];
      if (r.done) break;
    }
    CHECK(t.bounced());
    CHECK(r.terminal);
    CHECK(total > 0.0);
  }
  SUBCASE("per-episode reward set") {
    const std::set<double> allowed{0.0, 0.1, 0.2, 10.0};
    BounceTask t;
    for (int ep = 0; ep < 300; ++ep) {
      t.reset(rng);
      double total = 0.0;
      int events = 0;
      for (int s = 0; s < 100; ++s) {
        StepResult r = t.step(random_actions(2, rng), rng);
        CHECK(allowed.count(r.rewards[0]) == 1);
        if (r.rewards[0] != 0.0) ++events;
        total += r.rewards[0];
        if (r.done) break;
      }
      CHECK(events <= 1);
      CHECK(allowed.count(total) == 1);
    }
  }
}

TEST_CASE("compromise") {
  Rng rng(6);
  CompromiseTask t;
  t.reset(rng);
  auto& e = t.world().entities;
  e[0].pos = Vec2(0.3, 0.3);
  e[1].pos = Vec2(0.0, 0.2);
  e[0].vel.setZero();
  e[1].vel.setZero();
  e[2].pos = Vec2(0.3, 0.3);
  e[3].pos = Vec2(-0.9, -0.9);
  StepResult r = t.step({{0.0, 0.0}, {0.0, 0.0}}, rng);
  CHECK(r.rewards == std::vector<double>{10.0, 0.0});
  const Vec2 moved = t.world().entities[2].pos;
  CHECK(std::abs(moved.x()) <= 1.0);
  CHECK(std::abs(moved.y()) <= 1.0);

  for (int k = 0; k < 1000; ++k) {
    Vec2 p = uniform_position(rng, 1.0, 0.08);
    CHECK(std::abs(p.x()) <= 0.92);
    CHECK(std::abs(p.y()) <= 0.92);
  }

  World w;
  w.entities.resize(2);
  w.entities[0].pos = Vec2(-0.6, 0.1);
  w.entities[1].pos = Vec2(0.5, -0.2);
  w.springs.push_back(Spring{0, 1, 0.5, 10.0});
  auto f = spring_forces(w);
  CHECK((f[0] + f[1]).norm() < 1e-12);
  CHECK(f[0].dot(w.entities[1].pos - w.entities[0].pos) > 0.0);
  w.entities[1].pos = Vec2(-0.3, 0.1);
  f = spring_forces(w);
  CHECK(f[0].norm() == 0.0);
}

TEST_CASE("chase") {
  Rng rng(7);
  ChaseTask t;
  t.reset(rng);
  auto& e = t.world().entities;
  SUBCASE("two predators touching") {
    e[2].pos = Vec2(0.0, 0.0);
    e[0].pos = Vec2(0.06, 0.0);
    e[1].pos = Vec2(-0.06, 0.0);
    int n = 0;
    for (int i = 0; i < 2; ++i) n += overlap(e[static_cast<std::size_t>(i)], e[2]);
    CHECK(n == 2);
  }
  SUBCASE("symmetric predators cancel at the centre") {
    e[2].pos = Vec2::Zero();
    e[0].pos = Vec2(0.3, 0.2);
    e[1].pos = Vec2(-0.3, -0.2);
    CHECK(t.prey_force(t.world()).norm() < 1e-12);
  }
  SUBCASE("prey speed capped") {
    for (int ep = 0; ep < 20; ++ep) {
      t.reset(rng);
      for (int s = 0; s < 100; ++s) {
        t.step(random_actions(2, rng), rng);
        CHECK(t.world().entities[2].vel.norm() <= t.config().prey_max_speed + 1e-12);
      }
    }
  }
  SUBCASE("a single greedy predator rarely holds the prey") {
    int touching = 0, steps = 0;
    for (int ep = 0; ep < 30; ++ep) {
      t.reset(rng);
      t.world().entities[1].pos = Vec2(-0.95, -0.95);
      for (int s = 0; s < 100; ++s) {
        World& w = t.world();
        Vec2 d = w.entities[2].pos - w.entities[0].pos;
        if (d.norm() > 0) d.normalize();
        w.entities[1].pos = Vec2(-0.95, -0.95);
        w.entities[1].vel.setZero();
        StepResult r = t.step({{d.x(), d.y()}, {0.0, 0.0}}, rng);
        touching += overlap(t.world().entities[0], t.world().entities[2]);
        ++steps;
        (void)r;
      }
    }
    CHECK(static_cast<double>(touching) / steps < 0.1);
  }
}

TEST_CASE("replay is bit-identical") {
  for (Task task : {Task::Spread, Task::Bounce, Task::Compromise, Task::Chase}) {
    auto run = [&] {
      auto g = make_game(task);
      Rng env_rng(99), act_rng(5);
      std::vector<double> trace;
      JointObs o = g->reset(env_rng);
      for (int s = 0; s < 100; ++s) {
        StepResult r = g->step(random_actions(g->n_agents(), act_rng), env_rng);
        for (const Vec& v : r.obs) trace.insert(trace.end(), v.begin(), v.end());
        trace.insert(trace.end(), r.rewards.begin(), r.rewards.end());
        if (r.done) break;
      }
      return trace;
    };
    CHECK(run() == run());
  }
}
