#pragma once

#include <string>

#include "o2orl/dataset.hpp"

namespace o2orl {

enum class TargetMode { expert_reference, rmax_times_T };

TargetMode target_mode_from_string(const std::string& name);
std::string to_string(TargetMode mode);

struct AlphaSettings {
  double alpha_offline = 0.4;  // also the upper clamp for the online weight
  double kp = 0.003;           // how fast the weight falls while below target
  double kd = 0.1;             // how fast it rises when performance drops
  double r_target = 1.05;      // normalized target return
  double ema_beta = 0.1;       // moving-average coefficient for R_avg

  void validate() const;
};

// Adapts the behavior-cloning weight from normalized episodic returns:
//   delta = K_P * (R_avg - R_target) + K_D * max(0, R_avg - R_current)
// evaluated with the pre-update moving average, then the weight is clamped
// into [0, alpha_offline] and R_avg folds in the new return. R_avg starts
// at the first observed return.
class AlphaController {
 public:
  AlphaController(AlphaSettings settings, double initial_alpha);

  // One call per completed training episode; rejects non-finite returns
  // without touching the state. Returns the new weight.
  double adapt(double r_current_normalized);

  double alpha() const { return alpha_; }
  double r_avg() const { return r_avg_; }
  bool has_observation() const { return has_observation_; }
  double last_delta() const { return last_delta_; }
  const AlphaSettings& settings() const { return settings_; }

 private:
  AlphaSettings settings_;
  double alpha_ = 0.0;
  double r_avg_ = 0.0;
  bool has_observation_ = false;
  double last_delta_ = 0.0;
};

// Normalized target return: the expert-reference mode uses the configured
// constant (1.05 corresponds to just above the expert policy); the
// rmax_times_T mode normalizes the best physically possible return
// r_max * T with the dataset's reference scores.
double resolve_target(TargetMode mode, const ReferenceScores& refs, double expert_reference_value = 1.05);

}  // namespace o2orl
