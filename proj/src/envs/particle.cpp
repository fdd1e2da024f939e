#include "marl/envs/particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "marl/envs/chain.hpp"

namespace marl::env {
namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Task parse_task(const std::string& name) {
  if (name == "spread") return Task::Spread;
  if (name == "bounce") return Task::Bounce;
  if (name == "compromise") return Task::Compromise;
  if (name == "chase") return Task::Chase;
  if (name == "chain") return Task::Chain;
  throw std::invalid_argument("unknown env '" + name + "'");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::Spread: return "spread";
    case Task::Bounce: return "bounce";
    case Task::Compromise: return "compromise";
    case Task::Chase: return "chase";
    case Task::Chain: return "chain";
  }
  return "?";
}

bool overlap(const Entity& a, const Entity& b) { return (a.pos - b.pos).norm() < a.radius + b.radius; }

std::vector<Vec2> contact_forces(const World& w, const PhysicsConfig& cfg) {
  const auto n = w.entities.size();
  std::vector<Vec2> f(n, Vec2::Zero());
  for (std::size_t a = 0; a < n; ++a) {
    const Entity& ea = w.entities[a];
    if (!ea.collide) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      const Entity& eb = w.entities[b];
      if (!eb.collide || (!ea.movable && !eb.movable)) continue;
      const Vec2 delta = ea.pos - eb.pos;
      const double dist = delta.norm();
      if (dist == 0.0) continue;
      const double k = cfg.contact_margin;
      const double penetration = softplus(-(dist - (ea.radius + eb.radius)) / k) * k;
      const Vec2 force = cfg.contact_force * penetration * delta / dist;
      if (ea.movable) f[a] += force;
      if (eb.movable) f[b] -= force;
    }
  }
  return f;
}

std::vector<Vec2> spring_forces(const World& w) {
  std::vector<Vec2> f(w.entities.size(), Vec2::Zero());
  for (const Spring& s : w.springs) {
    const Vec2 d = w.entities[static_cast<std::size_t>(s.b)].pos - w.entities[static_cast<std::size_t>(s.a)].pos;
    const double dist = d.norm();
    if (dist <= s.rest_length || dist == 0.0) continue;
    const Vec2 pull = s.stiffness * (dist - s.rest_length) * d / dist;
    f[static_cast<std::size_t>(s.a)] += pull;
    f[static_cast<std::size_t>(s.b)] -= pull;
  }
  return f;
}

void integrate(World& w, const std::vector<Vec2>& control, const std::vector<Vec2>& external,
               const PhysicsConfig& cfg) {
  if (control.size() != w.entities.size() || external.size() != w.entities.size())
    throw std::invalid_argument("integrate: one control and one force per entity");
  for (std::size_t i = 0; i < w.entities.size(); ++i) {
    Entity& e = w.entities[i];
    if (!e.movable) continue;
    if (!control[i].allFinite() || !external[i].allFinite()) throw std::invalid_argument("integrate: non-finite force");
    const Vec2 u = control[i].cwiseMax(-1.0).cwiseMin(1.0);
    e.vel = (1.0 - cfg.damping) * e.vel + (u * e.accel + external[i]) * cfg.dt;
    const double speed = e.vel.norm();
    if (e.max_speed > 0.0 && speed > e.max_speed) e.vel *= e.max_speed / speed;
    e.pos += e.vel * cfg.dt;
    const double lim = cfg.arena - e.radius;
    for (int d = 0; d < 2; ++d) {
      if (e.pos[d] > lim) {
        e.pos[d] = lim;
        e.vel[d] = std::min(e.vel[d], 0.0);
      } else if (e.pos[d] < -lim) {
        e.pos[d] = -lim;
        e.vel[d] = std::max(e.vel[d], 0.0);
      }
    }
  }
}

Vec2 uniform_position(Rng& rng, double arena, double radius) {
  const double lim = arena - radius;
  const double x = uniform(rng, -lim, lim);
  const double y = uniform(rng, -lim, lim);
  return {x, y};
}

Vec observe(const World& w, int self, const std::vector<int>& others) {
  const Entity& me = w.entities[static_cast<std::size_t>(self)];
  Vec o{me.pos.x(), me.pos.y(), me.vel.x(), me.vel.y()};
  o.reserve(4 + 2 * others.size());
  for (int k : others) {
    const Vec2 rel = w.entities[static_cast<std::size_t>(k)].pos - me.pos;
    o.push_back(rel.x());
    o.push_back(rel.y());
  }
  return o;
}

std::vector<int> ParticleTask::obs_dims() const {
  std::vector<int> dims;
  for (int i = 0; i < n_agents(); ++i) dims.push_back(4 + 2 * static_cast<int>(observed(i).size()));
  return dims;
}

JointObs ParticleTask::observe_all() const {
  JointObs obs;
  for (int i = 0; i < n_agents(); ++i) obs.push_back(observe(world_, i, observed(i)));
  return obs;
}

JointObs ParticleTask::reset(Rng& rng) {
  world_ = World{};
  populate(rng);
  return observe_all();
}

StepResult ParticleTask::step(const JointAction& actions, Rng& rng) {
  if (static_cast<int>(actions.size()) != n_agents()) throw std::invalid_argument(name() + ": wrong number of actions");
  std::vector<Vec2> control(world_.entities.size(), Vec2::Zero());
  for (int i = 0; i < n_agents(); ++i) {
    const Vec& a = actions[static_cast<std::size_t>(i)];
    if (a.size() != 2) throw std::invalid_argument(name() + ": actions are 2-D");
    control[static_cast<std::size_t>(i)] = Vec2(a[0], a[1]);
  }
  scripted_control(control);
  std::vector<Vec2> external = contact_forces(world_, physics_);
  const std::vector<Vec2> springs = spring_forces(world_);
  for (std::size_t k = 0; k < external.size(); ++k) external[k] += springs[k];

  const World before = world_;
  integrate(world_, control, external, physics_);
  ++world_.step;

  StepResult out;
  out.rewards.assign(static_cast<std::size_t>(n_agents()), 0.0);
  after_move(before, rng, out);
  if (world_.step >= max_steps_) out.done = true;
  out.obs = observe_all();
  return out;
}

// ---------------------------------------------------------------- SPREAD

SpreadTask::SpreadTask(int n_agents, PhysicsConfig physics, int max_steps) : ParticleTask(physics, max_steps), n_(n_agents) {
  if (n_ < 1) throw std::invalid_argument("spread: need at least one agent");
}

void SpreadTask::populate(Rng& rng) {
  for (int i = 0; i < n_; ++i) {
    Entity a;
    a.radius = physics_.agent_radius;
    a.pos = uniform_position(rng, physics_.arena, a.radius);
    world_.entities.push_back(a);
  }
  for (int i = 0; i < n_; ++i) {
    Entity l;
    l.role = Role::Landmark;
    l.radius = physics_.landmark_radius;
    l.movable = false;
    l.collide = false;
    l.pos = uniform_position(rng, physics_.arena, l.radius);
    world_.entities.push_back(l);
  }
}

std::vector<int> SpreadTask::observed(int agent) const {
  std::vector<int> ids;
  for (int l = 0; l < n_; ++l) ids.push_back(n_ + l);
  for (int j = 0; j < n_; ++j)
    if (j != agent) ids.push_back(j);
  return ids;
}

double SpreadTask::team_reward() const {
  int covered = 0;
  for (int l = 0; l < n_; ++l) {
    const Entity& lm = world_.entities[static_cast<std::size_t>(n_ + l)];
    for (int i = 0; i < n_; ++i)
      if (overlap(world_.entities[static_cast<std::size_t>(i)], lm)) {
        ++covered;
        break;
      }
  }
  int collisions = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (overlap(world_.entities[static_cast<std::size_t>(i)], world_.entities[static_cast<std::size_t>(j)]))
        ++collisions;
  return covered - collisions;
}

void SpreadTask::after_move(const World&, Rng&, StepResult& out) {
  std::fill(out.rewards.begin(), out.rewards.end(), team_reward());
}

// ---------------------------------------------------------------- BOUNCE

BounceTask::BounceTask(BounceConfig cfg, PhysicsConfig physics, int max_steps)
    : ParticleTask(physics, max_steps), cfg_(cfg) {}

void BounceTask::populate(Rng& rng) {
  for (int i = 0; i < 2; ++i) {
    Entity a;
    a.radius = physics_.agent_radius;
    a.pos = uniform_position(rng, physics_.arena, a.radius);
    world_.entities.push_back(a);
  }
  Entity ball;
  ball.role = Role::Ball;
  ball.radius = cfg_.ball_radius;
  ball.movable = false;
  ball.collide = false;
  ball.pos = {uniform(rng, -physics_.arena + ball.radius, physics_.arena - ball.radius), cfg_.ball_start_y};
  world_.entities.push_back(ball);

  Entity target;
  target.role = Role::Landmark;
  target.radius = cfg_.target_radius;
  target.movable = false;
  target.collide = false;
  target.pos = {uniform(rng, -physics_.arena + target.radius, physics_.arena - target.radius), cfg_.target_y};
  world_.entities.push_back(target);

  world_.springs.push_back(cfg_.spring);
  active_ = false;
  bounced_ = false;
}

std::vector<int> BounceTask::observed(int agent) const { return {1 - agent, kBall, kTarget}; }

double BounceTask::classify_bounce(const Vec2& origin, const Vec2& direction) const {
  const double len = direction.norm();
  if (len == 0.0) return 0.1;
  const Vec2 d = direction / len;
  const Vec2& centre = world_.entities[kTarget].pos;
  const double t = std::max(0.0, (centre - origin).dot(d));
  if ((origin + t * d - centre).norm() < cfg_.target_radius) return 10.0;

  const double a = physics_.arena;
  const double inf = std::numeric_limits<double>::infinity();
  const double t_top = d.y() > 0.0 ? (a - origin.y()) / d.y() : inf;
  double t_other = inf;
  if (d.y() < 0.0) t_other = std::min(t_other, (-a - origin.y()) / d.y());
  if (d.x() > 0.0) t_other = std::min(t_other, (a - origin.x()) / d.x());
  if (d.x() < 0.0) t_other = std::min(t_other, (-a - origin.x()) / d.x());
  return t_top < t_other ? 0.2 : 0.1;
}

void BounceTask::after_move(const World&, Rng&, StepResult& out) {
  Entity& ball = world_.entities[kBall];
  if (bounced_) return;
  if (!active_ && world_.step > cfg_.release_step && ball.pos.y() > -physics_.arena) {
    active_ = true;
    ball.vel = Vec2(0.0, -cfg_.ball_speed);
  }
  if (!active_) return;

  const Vec2 from = ball.pos;
  const Vec2 move = ball.vel * physics_.dt;
  const Vec2 p0 = world_.entities[0].pos;
  const Vec2 edge = world_.entities[1].pos - p0;
  const double denom = cross(move, edge);
  if (denom != 0.0) {
    const Vec2 rel = p0 - from;
    const double t = cross(rel, edge) / denom;
    const double s = cross(rel, move) / denom;
    if (t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0) {
      const Vec2 hit = from + t * move;
      const Vec2 normal = Vec2(-edge.y(), edge.x()).normalized();
      const Vec2 reflected = ball.vel - 2.0 * ball.vel.dot(normal) * normal;
      ball.pos = hit;
      ball.vel = reflected;
      bounced_ = true;
      active_ = false;
      std::fill(out.rewards.begin(), out.rewards.end(), classify_bounce(hit, reflected));
      out.done = true;
      out.terminal = true;
      return;
    }
  }
  ball.pos = from + move;
  if (ball.pos.y() <= -physics_.arena) {
    ball.pos.y() = -physics_.arena;
    ball.vel.setZero();
    active_ = false;
  }
}

// ---------------------------------------------------------------- COMPROMISE

CompromiseTask::CompromiseTask(CompromiseConfig cfg, PhysicsConfig physics, int max_steps)
    : ParticleTask(physics, max_steps), cfg_(cfg) {}

void CompromiseTask::populate(Rng& rng) {
  for (int i = 0; i < 2; ++i) {
    Entity a;
    a.radius = physics_.agent_radius;
    a.pos = uniform_position(rng, physics_.arena, a.radius);
    world_.entities.push_back(a);
  }
  for (int i = 0; i < 2; ++i) {
    Entity l;
    l.role = Role::Landmark;
    l.radius = physics_.landmark_radius;
    l.movable = false;
    l.collide = false;
    l.pos = uniform_position(rng, physics_.arena, l.radius);
    world_.entities.push_back(l);
  }
  world_.springs.push_back(cfg_.spring);
}

std::vector<int> CompromiseTask::observed(int agent) const {
  return {1 - agent, kLandmark0 + agent, kLandmark0 + 1 - agent};
}

void CompromiseTask::after_move(const World&, Rng& rng, StepResult& out) {
  for (int i = 0; i < 2; ++i) {
    Entity& lm = world_.entities[static_cast<std::size_t>(kLandmark0 + i)];
    if (overlap(world_.entities[static_cast<std::size_t>(i)], lm)) {
      out.rewards[static_cast<std::size_t>(i)] += cfg_.reward;
      lm.pos = uniform_position(rng, physics_.arena, lm.radius);
    }
  }
}

// ---------------------------------------------------------------- CHASE

ChaseTask::ChaseTask(ChaseConfig cfg, PhysicsConfig physics, int max_steps) : ParticleTask(physics, max_steps), cfg_(cfg) {}

void ChaseTask::populate(Rng& rng) {
  for (int i = 0; i < 2; ++i) {
    Entity a;
    a.radius = physics_.agent_radius;
    a.accel = cfg_.predator_accel;
    a.max_speed = cfg_.predator_max_speed;
    a.pos = uniform_position(rng, physics_.arena, a.radius);
    world_.entities.push_back(a);
  }
  Entity prey;
  prey.role = Role::Prey;
  prey.radius = physics_.agent_radius;
  prey.accel = cfg_.prey_accel;
  prey.max_speed = cfg_.prey_max_speed;
  prey.pos = uniform_position(rng, physics_.arena, prey.radius);
  world_.entities.push_back(prey);
}

std::vector<int> ChaseTask::observed(int agent) const { return {1 - agent, kPrey}; }

Vec2 ChaseTask::prey_force(const World& w) const {
  const Vec2& p = w.entities[kPrey].pos;
  Vec2 f = Vec2::Zero();
  for (int i = 0; i < 2; ++i) {
    const Vec2 d = p - w.entities[static_cast<std::size_t>(i)].pos;
    const double dist = std::max(d.norm(), 1e-3);
    if (d.norm() > 0.0) f += cfg_.predator_gain * d.normalized() / (dist * dist);
  }
  const double a = physics_.arena;
  for (int k = 0; k < 2; ++k) {
    const double lo = std::max(p[k] + a, 1e-3);
    const double hi = std::max(a - p[k], 1e-3);
    f[k] += cfg_.wall_gain / (lo * lo) - cfg_.wall_gain / (hi * hi);
  }
  const double norm = f.norm();
  if (norm > 1.0) f /= norm;
  return f;
}

void ChaseTask::scripted_control(std::vector<Vec2>& control) const { control[kPrey] = prey_force(world_); }

void ChaseTask::after_move(const World&, Rng&, StepResult& out) {
  int touching = 0;
  for (int i = 0; i < 2; ++i)
    if (overlap(world_.entities[static_cast<std::size_t>(i)], world_.entities[kPrey])) ++touching;
  std::fill(out.rewards.begin(), out.rewards.end(), static_cast<double>(touching));
}

std::unique_ptr<MarkovGame> make_game(Task task, int n_agents) {
  switch (task) {
    case Task::Spread: return std::make_unique<SpreadTask>(n_agents > 0 ? n_agents : 3);
    case Task::Bounce: return std::make_unique<BounceTask>();
    case Task::Compromise: return std::make_unique<CompromiseTask>();
    case Task::Chase: return std::make_unique<ChaseTask>();
    case Task::Chain: return std::make_unique<ChainGame>(5, false, 50);
  }
  throw std::invalid_argument("make_game: unknown task");
}

}  // namespace marl::env
