#include "o2orl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace o2orl {

namespace {
constexpr double kPendulumGravity = 10.0;
constexpr double kPendulumMass = 1.0;
constexpr double kPendulumLength = 1.0;
constexpr double kPendulumMaxSpeed = 8.0;
constexpr double kPointmassDamping = 0.98;
}  // namespace

double wrap_angle(double theta) {
  double x = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (x <= 0.0) x += 2.0 * M_PI;
  return x - M_PI;
}

EnvSpec make_env_spec(const std::string& env_id) {
  EnvSpec spec;
  spec.env_id = env_id;
  if (env_id == "pendulum") {
    spec.obs_dim = 3;
    spec.act_dim = 1;
    spec.action_low = VectorXd::Constant(1, -2.0);
    spec.action_high = VectorXd::Constant(1, 2.0);
    spec.max_episode_steps = 200;
    spec.r_max = 0.0;
    spec.dt = 0.05;
  } else if (env_id == "pointmass") {
    spec.obs_dim = 4;
    spec.act_dim = 2;
    spec.action_low = VectorXd::Constant(2, -1.0);
    spec.action_high = VectorXd::Constant(2, 1.0);
    spec.max_episode_steps = 100;
    spec.r_max = 0.0;
    spec.dt = 0.1;
  } else {
    throw std::invalid_argument("unknown env_id '" + env_id + "' (expected pendulum or pointmass)");
  }
  return spec;
}

std::string describe(const EnvSpec& spec) {
  std::ostringstream out;
  out << spec.env_id << ": obs_dim=" << spec.obs_dim << " act_dim=" << spec.act_dim
      << " action_range=[" << spec.action_low(0) << ", " << spec.action_high(0) << "]"
      << " T=" << spec.max_episode_steps << " r_max=" << spec.r_max << " dt=" << spec.dt;
  return out.str();
}

bool operator==(const Transition& a, const Transition& b) {
  return a.obs == b.obs && a.action == b.action && a.next_obs == b.next_obs && a.reward == b.reward &&
         a.terminal == b.terminal;
}

Env::Env(EnvSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {}

VectorXd Env::reset() {
  if (spec_.env_id == "pendulum") {
    state_.resize(2);
    state_(0) = rng_.uniform(-M_PI, M_PI);  // angle
    state_(1) = rng_.uniform(-1.0, 1.0);    // angular velocity
  } else {
    state_.resize(4);
    state_(0) = rng_.uniform(-1.0, 1.0);  // position
    state_(1) = rng_.uniform(-1.0, 1.0);
    state_(2) = 0.0;  // velocity
    state_(3) = 0.0;
  }
  steps_ = 0;
  finished_ = false;
  return observe();
}

VectorXd Env::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  return reset();
}

void Env::set_internal_state(const VectorXd& state) {
  const int want = spec_.env_id == "pendulum" ? 2 : 4;
  if (state.size() != want) throw std::invalid_argument("set_internal_state: wrong state size");
  state_ = state;
  steps_ = 0;
  finished_ = false;
}

VectorXd Env::observe() const {
  if (spec_.env_id == "pendulum") {
    VectorXd obs(3);
    obs << std::cos(state_(0)), std::sin(state_(0)), state_(1);
    return obs;
  }
  return state_;
}

StepResult Env::step(const VectorXd& action) {
  if (finished_) throw std::logic_error("Env::step: episode already finished, call reset()");
  if (action.size() != spec_.act_dim)
    throw std::invalid_argument("Env::step: action size " + std::to_string(action.size()) +
                                " does not match act_dim " + std::to_string(spec_.act_dim));
  StepResult result;
  if (spec_.env_id == "pendulum") {
    const double torque = std::clamp(action(0), spec_.action_low(0), spec_.action_high(0));
    double theta = state_(0);
    double theta_dot = state_(1);
    // reward is charged on the pre-step state and the applied torque
    result.reward = -(wrap_angle(theta) * wrap_angle(theta) + 0.1 * theta_dot * theta_dot +
                      0.001 * torque * torque);
    const double theta_ddot =
        3.0 * kPendulumGravity / (2.0 * kPendulumLength) * std::sin(theta) +
        3.0 / (kPendulumMass * kPendulumLength * kPendulumLength) * torque;
    theta_dot = std::clamp(theta_dot + theta_ddot * spec_.dt, -kPendulumMaxSpeed, kPendulumMaxSpeed);
    theta += theta_dot * spec_.dt;
    state_(0) = theta;
    state_(1) = theta_dot;
  } else {
    VectorXd accel(2);
    accel(0) = std::clamp(action(0), spec_.action_low(0), spec_.action_high(0));
    accel(1) = std::clamp(action(1), spec_.action_low(1), spec_.action_high(1));
    result.reward = -std::hypot(state_(0), state_(1)) - 0.01 * accel.squaredNorm();
    state_(2) = kPointmassDamping * (state_(2) + accel(0) * spec_.dt);
    state_(3) = kPointmassDamping * (state_(3) + accel(1) * spec_.dt);
    state_(0) += state_(2) * spec_.dt;
    state_(1) += state_(3) * spec_.dt;
  }
  ++steps_;
  result.terminal = false;  // both tasks end on the clock, never by physics
  result.truncated = steps_ >= spec_.max_episode_steps;
  finished_ = result.truncated;
  result.obs = observe();
  return result;
}

double episode_return(std::span<const double> rewards) {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

}  // namespace o2orl
