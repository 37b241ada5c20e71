#include <cmath>
#include <vector>

#include "doctest.h"
#include "o2orl/env.hpp"

using namespace o2orl;

TEST_CASE("unknown env ids are rejected") {
  CHECK_THROWS_AS(make_env_spec("cartpole"), std::invalid_argument);
}

TEST_CASE("pendulum reset draws from the documented ranges and is seed-deterministic") {
  const EnvSpec spec = make_env_spec("pendulum");
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    Env env(spec, seed);
    env.reset();
    const VectorXd& s = env.internal_state();
    CHECK(s(0) >= -M_PI);
    CHECK(s(0) <= M_PI);
    CHECK(s(1) >= -1.0);
    CHECK(s(1) <= 1.0);
    CHECK(env.steps() == 0);

    Env env2(spec, seed);
    env2.reset();
    CHECK(env.internal_state() == env2.internal_state());
  }
}

TEST_CASE("pointmass reset starts at rest inside the unit square") {
  const EnvSpec spec = make_env_spec("pointmass");
  Env env(spec, 9);
  env.reset();
  const VectorXd& s = env.internal_state();
  CHECK(std::abs(s(0)) <= 1.0);
  CHECK(std::abs(s(1)) <= 1.0);
  CHECK(s(2) == 0.0);
  CHECK(s(3) == 0.0);
  CHECK(env.steps() == 0);
}

TEST_CASE("pendulum hanging still at the bottom with no torque stays put") {
  const EnvSpec spec = make_env_spec("pendulum");
  Env env(spec, 1);
  env.reset();
  VectorXd state(2);
  state << 0.0, 0.0;
  env.set_internal_state(state);
  const StepResult r = env.step(VectorXd::Zero(1));
  CHECK(r.reward == 0.0);
  CHECK(std::abs(env.internal_state()(0)) < 1e-15);
  CHECK(std::abs(env.internal_state()(1)) < 1e-15);
}

TEST_CASE("pendulum balanced upright follows the hand-evaluated dynamics") {
  // theta = pi, zero velocity, zero torque: theta_ddot = 15 sin(pi) ~ 0 and
  // the step is charged the full upright cost of -pi^2
  const EnvSpec spec = make_env_spec("pendulum");
  Env env(spec, 1);
  env.reset();
  VectorXd state(2);
  state << M_PI, 0.0;
  env.set_internal_state(state);
  const StepResult r = env.step(VectorXd::Zero(1));
  CHECK(r.reward == doctest::Approx(-M_PI * M_PI).epsilon(1e-12));
  CHECK(std::abs(env.internal_state()(1)) < 1e-12);
}

TEST_CASE("pointmass at the origin with no thrust stays and earns zero") {
  const EnvSpec spec = make_env_spec("pointmass");
  Env env(spec, 1);
  env.reset();
  env.set_internal_state(VectorXd::Zero(4));
  const StepResult r = env.step(VectorXd::Zero(2));
  CHECK(r.reward == 0.0);
  CHECK(env.internal_state().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rewards never exceed r_max for either task") {
  for (const char* id : {"pendulum", "pointmass"}) {
    const EnvSpec spec = make_env_spec(id);
    Rng rng(55);
    for (int episode = 0; episode < 20; ++episode) {
      Env env(spec, rng.next_u64());
      env.reset();
      while (!env.finished()) {
        VectorXd a(spec.act_dim);
        for (int d = 0; d < spec.act_dim; ++d) a(d) = rng.uniform(-4.0, 4.0);  // beyond bounds on purpose
        const StepResult r = env.step(a);
        CHECK(r.reward <= spec.r_max);
      }
    }
  }
}

TEST_CASE("stepping with an action is the same as stepping with its clipped version") {
  for (const char* id : {"pendulum", "pointmass"}) {
    const EnvSpec spec = make_env_spec(id);
    Rng rng(66);
    Env env(spec, 3);
    env.reset();
    for (int i = 0; i < 50; ++i) {
      VectorXd wild(spec.act_dim), clipped(spec.act_dim);
      for (int d = 0; d < spec.act_dim; ++d) {
        wild(d) = rng.uniform(-10.0, 10.0);
        clipped(d) = std::clamp(wild(d), spec.action_low(d), spec.action_high(d));
      }
      Env twin = env;  // same physical state
      const StepResult a = env.step(wild);
      const StepResult b = twin.step(clipped);
      CHECK(a.reward == b.reward);
      CHECK((a.obs - b.obs).cwiseAbs().maxCoeff() == 0.0);
      if (env.finished()) break;
    }
  }
}

TEST_CASE("dynamics are deterministic at 64-bit") {
  const EnvSpec spec = make_env_spec("pendulum");
  Env a(spec, 12), b(spec, 12);
  a.reset();
  b.reset();
  VectorXd torque(1);
  torque << 1.3;
  for (int i = 0; i < 200; ++i) {
    const StepResult ra = a.step(torque);
    const StepResult rb = b.step(torque);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.obs == rb.obs);
  }
}

TEST_CASE("episodes truncate at the step limit and never terminate") {
  const EnvSpec spec = make_env_spec("pointmass");
  Env env(spec, 4);
  env.reset();
  StepResult last;
  for (int i = 0; i < spec.max_episode_steps; ++i) {
    CHECK_FALSE(env.finished());
    last = env.step(VectorXd::Zero(2));
    CHECK_FALSE(last.terminal);
  }
  CHECK(last.truncated);
  CHECK(env.finished());
  CHECK_THROWS_AS(env.step(VectorXd::Zero(2)), std::logic_error);
  env.reset();
  CHECK(env.steps() == 0);
}

TEST_CASE("wrong action dimension is rejected") {
  Env env(make_env_spec("pendulum"), 5);
  env.reset();
  CHECK_THROWS_AS(env.step(VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("episode_return sums rewards") {
  CHECK(episode_return({}) == 0.0);
  const std::vector<double> rewards{1.0, 2.0, 3.0};
  CHECK(episode_return(rewards) == 6.0);
}

TEST_CASE("a zero-torque pendulum episode matches a step-by-step oracle") {
  const EnvSpec spec = make_env_spec("pendulum");
  Env env(spec, 1);
  env.reset();
  VectorXd start(2);
  start << M_PI, 0.0;
  env.set_internal_state(start);

  // independent simulation of the stated dynamics
  double theta = M_PI, theta_dot = 0.0, oracle_total = 0.0;
  for (int i = 0; i < spec.max_episode_steps; ++i) {
    oracle_total += -(wrap_angle(theta) * wrap_angle(theta) + 0.1 * theta_dot * theta_dot);
    const double acc = 15.0 * std::sin(theta);
    theta_dot = std::clamp(theta_dot + acc * 0.05, -8.0, 8.0);
    theta += theta_dot * 0.05;
  }

  std::vector<double> rewards;
  while (!env.finished()) rewards.push_back(env.step(VectorXd::Zero(1)).reward);
  CHECK(rewards.size() == static_cast<std::size_t>(spec.max_episode_steps));
  CHECK(episode_return(rewards) == doctest::Approx(oracle_total).epsilon(1e-9));
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(2.5 * M_PI) == doctest::Approx(0.5 * M_PI));
  CHECK(wrap_angle(-0.5 * M_PI) == doctest::Approx(-0.5 * M_PI));
}
