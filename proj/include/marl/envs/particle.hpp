#pragma once

#include <Eigen/Core>

#include <vector>

#include "marl/envs/game.hpp"

namespace marl::env {

using Vec2 = Eigen::Vector2d;

enum class Role { Agent, Landmark, Ball, Prey };

struct Entity {
  Role role = Role::Agent;
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  double radius = 0.05;
  double accel = 5.0;      // control gain
  double max_speed = 1.0;  // <= 0 means uncapped
  bool movable = true;
  bool collide = true;
};

struct Spring {
  int a = 0;
  int b = 1;
  double rest_length = 0.5;
  double stiffness = 10.0;
};

struct PhysicsConfig {
  double dt = 0.1;
  double damping = 0.25;
  double contact_force = 100.0;
  double contact_margin = 1e-3;
  double arena = 1.0;  // half-width of the square arena
  double agent_radius = 0.05;
  double landmark_radius = 0.08;
};

struct World {
  std::vector<Entity> entities;
  std::vector<Spring> springs;
  int step = 0;
};

// Center distance below the sum of radii.
bool overlap(const Entity& a, const Entity& b);

// Soft penalty contacts between colliding movable pairs.
std::vector<Vec2> contact_forces(const World& w, const PhysicsConfig& cfg);
// Hooke attraction for springs stretched past their rest length.
std::vector<Vec2> spring_forces(const World& w);

// v <- (1 - damping) v + (control * accel + external) dt, speed capped, p <- p + v dt,
// then positions clamped into the arena with the outward velocity removed.
void integrate(World& w, const std::vector<Vec2>& control, const std::vector<Vec2>& external,
               const PhysicsConfig& cfg);

Vec2 uniform_position(Rng& rng, double arena, double radius);

// [own pos, own vel, pos of each listed entity relative to the observer].
Vec observe(const World& w, int self, const std::vector<int>& others);

// Base for the particle tasks. Agents are the first n_agents() entities; each takes a
// 2-D continuous action in [-1, 1].
class ParticleTask : public MarkovGame {
 public:
  explicit ParticleTask(PhysicsConfig physics = {}, int max_steps = 100) : physics_(physics), max_steps_(max_steps) {}

  const World& world() const { return world_; }
  World& world() { return world_; }
  const PhysicsConfig& physics() const { return physics_; }

  std::vector<int> obs_dims() const override;
  ActionSpec action_spec(int) const override { return {false, 2}; }
  int max_steps() const override { return max_steps_; }

  JointObs reset(Rng& rng) override;
  StepResult step(const JointAction& actions, Rng& rng) override;
  JointObs observe_all() const;

 protected:
  virtual void populate(Rng& rng) = 0;
  virtual std::vector<int> observed(int agent) const = 0;
  // Control for entities that are not learning agents (the prey).
  virtual void scripted_control(std::vector<Vec2>&) const {}
  // Called after integration; fills rewards and may end the episode.
  virtual void after_move(const World& before, Rng& rng, StepResult& out) = 0;

  World world_;
  PhysicsConfig physics_;
  int max_steps_;
};

class SpreadTask final : public ParticleTask {
 public:
  explicit SpreadTask(int n_agents = 3, PhysicsConfig physics = {}, int max_steps = 100);
  std::string name() const override { return "spread"; }
  int n_agents() const override { return n_; }
  double team_reward() const;

 protected:
  void populate(Rng& rng) override;
  std::vector<int> observed(int agent) const override;
  void after_move(const World& before, Rng& rng, StepResult& out) override;

 private:
  int n_;
};

struct BounceConfig {
  double ball_radius = 0.03;
  double ball_speed = 1.0;
  double ball_start_y = 0.95;
  int release_step = 50;
  double target_y = 0.5;
  double target_radius = 0.1;
  Spring spring{0, 1, 0.5, 10.0};
};

class BounceTask final : public ParticleTask {
 public:
  explicit BounceTask(BounceConfig cfg = {}, PhysicsConfig physics = {}, int max_steps = 100);
  std::string name() const override { return "bounce"; }
  int n_agents() const override { return 2; }

  static constexpr int kBall = 2;
  static constexpr int kTarget = 3;

  // Reward for a ball leaving `origin` along `direction` after bouncing.
  double classify_bounce(const Vec2& origin, const Vec2& direction) const;
  bool ball_active() const { return active_; }
  bool bounced() const { return bounced_; }

 protected:
  void populate(Rng& rng) override;
  std::vector<int> observed(int agent) const override;
  void after_move(const World& before, Rng& rng, StepResult& out) override;

 private:
  BounceConfig cfg_;
  bool active_ = false;
  bool bounced_ = false;
};

struct CompromiseConfig {
  Spring spring{0, 1, 0.5, 10.0};
  double reward = 10.0;
};

class CompromiseTask final : public ParticleTask {
 public:
  explicit CompromiseTask(CompromiseConfig cfg = {}, PhysicsConfig physics = {}, int max_steps = 100);
  std::string name() const override { return "compromise"; }
  int n_agents() const override { return 2; }

  static constexpr int kLandmark0 = 2;

 protected:
  void populate(Rng& rng) override;
  std::vector<int> observed(int agent) const override;
  void after_move(const World& before, Rng& rng, StepResult& out) override;

 private:
  CompromiseConfig cfg_;
};

struct ChaseConfig {
  double predator_accel = 3.0;
  double predator_max_speed = 1.0;
  double prey_accel = 4.0;
  double prey_max_speed = 1.3;
  double predator_gain = 0.25;  // repulsion gain / d^2
  double wall_gain = 0.02;
};

class ChaseTask final : public ParticleTask {
 public:
  explicit ChaseTask(ChaseConfig cfg = {}, PhysicsConfig physics = {}, int max_steps = 100);
  std::string name() const override { return "chase"; }
  int n_agents() const override { return 2; }

  static constexpr int kPrey = 2;

  // Scripted prey force, unit-norm capped.
  Vec2 prey_force(const World& w) const;
  const ChaseConfig& config() const { return cfg_; }

 protected:
  void populate(Rng& rng) override;
  std::vector<int> observed(int agent) const override;
  void scripted_control(std::vector<Vec2>& control) const override;
  void after_move(const World& before, Rng& rng, StepResult& out) override;

 private:
  ChaseConfig cfg_;
};

std::unique_ptr<MarkovGame> make_game(Task task, int n_agents = 0);

}  // namespace marl::env
