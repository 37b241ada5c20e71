#pragma once

#include <string>
#include <vector>

#include "o2orl/agent.hpp"
#include "o2orl/alpha.hpp"
#include "o2orl/config.hpp"
#include "o2orl/dataset.hpp"

namespace o2orl {

struct EvalStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<double> returns;
};

// Deterministic-policy evaluation on fresh environment instances with
// per-episode sub-seeds; never touches training state.
EvalStats evaluate_policy(const DenseNet<float>& actor, const EnvSpec& spec, int episodes,
                          std::uint64_t seed);
EvalStats evaluate_random_policy(const EnvSpec& spec, int episodes, std::uint64_t seed);

// One learning-curve record. Evaluation rows fill the eval_* fields;
// online episode rows fill the episode fields; unused fields are NaN.
struct CurveRow {
  std::string phase;  // "offline" | "online"
  long step = 0;      // gradient step (offline) or environment step (online)
  double episode_return, episode_return_norm;
  double alpha, r_avg;
  double eval_mean, eval_std, eval_mean_norm;
  double td_loss;  // mean critic loss since the previous evaluation row

  CurveRow();
};

// Wall-clock timing lives in its own table so curve files stay byte-stable
// across reruns of the same resolved config.
struct TimingRow {
  std::string phase;
  long step = 0;
  double seconds = 0.0;  // elapsed since the phase started
};

struct TrainResult {
  std::vector<CurveRow> curve;
  std::vector<TimingRow> timing;
  long critic_updates = 0;
  long actor_updates = 0;
  long target_updates = 0;
  long episodes_completed = 0;
  long alpha_adaptations = 0;
  double initial_eval_norm = 0.0;
  double final_eval_norm = 0.0;
  double final_alpha = 0.0;
};

// Offline phase of the algorithm: the replay buffer holds the dataset and
// the agent takes `offline_steps` iterations (every critic each iteration,
// actor and targets every policy_delay-th) at the fixed offline weight.
TrainResult pretrain_offline(const RunConfig& cfg, const OfflineDataset& dataset, Agent<float>& agent);

// Online phase: buffer seeded with the dataset then downsampled once, the
// weight starts at its offline value (or stays pinned in fixed mode), each
// environment step triggers updates_per_step critic iterations, and the
// controller adapts the weight after every completed episode.
TrainResult finetune_online(const RunConfig& cfg, const OfflineDataset& dataset, Agent<float>& agent,
                            double initial_alpha);

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows);
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows);
extern const char* kCurveHeader;

}  // namespace o2orl
