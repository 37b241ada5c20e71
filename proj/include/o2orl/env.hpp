#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "o2orl/rng.hpp"

namespace o2orl {

using Eigen::VectorXd;

struct EnvSpec {
  std::string env_id;
  int obs_dim = 0;
  int act_dim = 0;
  VectorXd action_low, action_high;
  int max_episode_steps = 0;
  double r_max = 0.0;  // upper bound on any single-step reward
  double dt = 0.0;
};

// Built-in environments: "pendulum" (torque-limited swing-up, dense cost)
// and "pointmass" (2-D reach with damped velocity).
EnvSpec make_env_spec(const std::string& env_id);
std::string describe(const EnvSpec& spec);

// One environment step as stored in datasets and replay. `terminal` marks
// absorbing termination only; running out the episode clock sets `truncated`
// on the step result but never `terminal`.
struct Transition {
  Eigen::VectorXf obs, action, next_obs;
  float reward = 0.0f;
  bool terminal = false;
};

bool operator==(const Transition& a, const Transition& b);

struct StepResult {
  VectorXd obs;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

// Seedable environment instance. Dynamics are deterministic in double
// precision; randomness enters only through reset draws.
class Env {
 public:
  Env(EnvSpec spec, std::uint64_t seed);

  VectorXd reset();
  VectorXd reset(std::uint64_t seed);
  StepResult step(const VectorXd& action);

  const EnvSpec& spec() const { return spec_; }
  int steps() const { return steps_; }
  bool finished() const { return finished_; }
  const VectorXd& internal_state() const { return state_; }
  void set_internal_state(const VectorXd& state);

 private:
  VectorXd observe() const;

  EnvSpec spec_;
  Rng rng_;
  VectorXd state_;
  int steps_ = 0;
  bool finished_ = true;
};

// Undiscounted episodic return.
double episode_return(std::span<const double> rewards);

// Angle wrapped into (-pi, pi].
double wrap_angle(double theta);

}  // namespace o2orl
