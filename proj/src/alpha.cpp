#include "o2orl/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace o2orl {

TargetMode target_mode_from_string(const std::string& name) {
  if (name == "expert_reference") return TargetMode::expert_reference;
  if (name == "rmax_times_T") return TargetMode::rmax_times_T;
  throw std::invalid_argument("unknown target mode '" + name + "'");
}

std::string to_string(TargetMode mode) {
  return mode == TargetMode::expert_reference ? "expert_reference" : "rmax_times_T";
}

void AlphaSettings::validate() const {
  if (!(alpha_offline >= 0.0) || !std::isfinite(alpha_offline))
    throw std::invalid_argument("AlphaSettings: alpha_offline must be finite and >= 0");
  if (kp < 0.0 || kd < 0.0) throw std::invalid_argument("AlphaSettings: gains must be >= 0");
  if (!std::isfinite(r_target)) throw std::invalid_argument("AlphaSettings: r_target must be finite");
  if (!(ema_beta > 0.0 && ema_beta <= 1.0))
    throw std::invalid_argument("AlphaSettings: ema_beta must be in (0, 1]");
}

AlphaController::AlphaController(AlphaSettings settings, double initial_alpha)
    : settings_(settings) {
  settings_.validate();
  if (!(initial_alpha >= 0.0 && initial_alpha <= settings_.alpha_offline))
    throw std::invalid_argument("AlphaController: initial alpha outside [0, alpha_offline]");
  alpha_ = initial_alpha;
}

double AlphaController::adapt(double r_current_normalized) {
  if (!std::isfinite(r_current_normalized))
    throw std::invalid_argument("AlphaController::adapt: non-finite episodic return");
  if (!has_observation_) {
    r_avg_ = r_current_normalized;
    has_observation_ = true;
  }
  const double delta = settings_.kp * (r_avg_ - settings_.r_target) +
                       settings_.kd * std::max(0.0, r_avg_ - r_current_normalized);
  last_delta_ = delta;
  alpha_ = std::clamp(alpha_ + delta, 0.0, settings_.alpha_offline);
  r_avg_ = (1.0 - settings_.ema_beta) * r_avg_ + settings_.ema_beta * r_current_normalized;
  return alpha_;
}

double resolve_target(TargetMode mode, const ReferenceScores& refs, double expert_reference_value) {
  if (mode == TargetMode::expert_reference) return expert_reference_value;
  return normalize_return(refs.rmax_times_t, refs);
}

}  // namespace o2orl
