#include <cmath>

#include "doctest.h"
#include "marl/tabular/qlearning.hpp"

using namespace marl;
using namespace marl::tab;

TEST_CASE("boltzmann probabilities") {
  CHECK(boltzmann_probability({0.3, 0.3}, 0) == doctest::Approx(0.5));
  CHECK(boltzmann_probability({10.0, 0.0}, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-10.0))).epsilon(1e-12));
  CHECK(std::abs(boltzmann_probability({1.0, -2.0}, 0, 1e6) - 0.5) < 1e-5);

  Rng rng(3);
  int zeros = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) zeros += boltzmann_sample({0.0, 0.0}, 1.0, rng) == 0;
  CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) < 0.01);
}

TEST_CASE("q update") {
  QTable q(3);
  q_update(q, 0, 1, -1.0, 1, false);
  CHECK(q[0][1] == doctest::Approx(-0.05));

  QTable fixed(2);
  fixed[1] = {-2.0, -3.0};
  fixed[0][0] = -1.0 + 0.99 * -2.0;
  const double before = fixed[0][0];
  q_update(fixed, 0, 0, -1.0, 1, false);
  CHECK(fixed[0][0] == doctest::Approx(before).epsilon(1e-15));

  QTable term(2);
  term[1] = {-50.0, -50.0};
  q_update(term, 0, 0, -1.0, 1, true);
  CHECK(term[0][0] == doctest::Approx(-0.05));

  QTable loop(1);
  for (int k = 0; k < 200000; ++k) q_update(loop, 0, k % 2, -1.0, 0, false);
  CHECK(loop[0][0] == doctest::Approx(-100.0).epsilon(1e-6));
  CHECK(loop[0][1] == doctest::Approx(-100.0).epsilon(1e-6));
}

TEST_CASE("q values stay above -1/(1-gamma)") {
  Rng rng(1);
  QTable q(4);
  for (int k = 0; k < 50000; ++k) {
    const int s = uniform_int(rng, 0, 3), a = uniform_int(rng, 0, 1), s2 = uniform_int(rng, 0, 3);
    q_update(q, s, a, -1.0, s2, uniform(rng, 0, 1) < 0.1);
    CHECK(q[s][a] >= -100.0 - 1e-9);
  }
}

TEST_CASE("greedy ties go to action 0") {
  QTable q(2);
  CHECK(q.greedy(0) == 0);
  q[0][1] = 1e-12;
  CHECK(q.greedy(0) == 1);
}

TEST_CASE("optimal joint greedy policy returns -L") {
  env::ChainGame g(5, false, 50);
  QTable q1(6), q2(6);  // all ties -> both push right
  CHECK(greedy_return(g, q1, q2) == -5.0);
  env::ChainGame c(5, true, 50);
  QTable agree(6);
  for (int s = 0; s < 6; ++s) agree[s] = {0.0, 1.0};
  CHECK(greedy_return(c, q1, agree) == -5.0);
}

TEST_CASE("toy experiment") {
  ToyConfig cfg;
  cfg.episodes = 150;
  cfg.master_seed = 7;
  SUBCASE("identical seed, identical curves") {
    cfg.n_seeds = 3;
    CHECK(run_toy_experiment(cfg, true).mean == run_toy_experiment(cfg, true).mean);
    CHECK(run_toy_experiment(cfg, false).per_seed == run_toy_experiment(cfg, false).per_seed);
  }
  SUBCASE("both variants converge to the optimum") {
    for (bool coordinated : {false, true}) {
      ToyCurves c = run_toy_experiment(cfg, coordinated);
      CHECK(c.mean.back() == -5.0);
    }
  }
  SUBCASE("threshold and hitting time") {
    CHECK(ninety_percent_threshold(cfg) == doctest::Approx(-9.5));
    CHECK(hitting_episode({-50, -20, -9.0, -5}, -9.5) == 3);
    CHECK(hitting_episode({-50, -20}, -9.5) == 3);
  }
}
