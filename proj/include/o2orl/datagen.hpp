#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "o2orl/config.hpp"
#include "o2orl/dataset.hpp"

namespace o2orl {

// Output of one reference-policy training run: everything needed to cut the
// five dataset tiers without retraining.
struct GeneratedDatasets {
  std::map<Tier, OfflineDataset> tiers;
  ReferenceScores refs;
  long medium_snapshot_step = -1;
  double medium_snapshot_norm = 0.0;
  double expert_eval_mean = 0.0;
  double random_eval_mean = 0.0;
  std::vector<std::pair<long, double>> trainer_trace;  // (step, raw snapshot eval)
};

// Trains an online agent from scratch (no behavior cloning) on the configured
// environment, records snapshots and the full transition log, computes the
// reference scores from `reference_episodes`-episode evaluations of the
// random and final policies, then assembles the requested tiers:
//   random        rollouts of the uniform policy
//   expert        rollouts of the final trained policy
//   medium        rollouts of the first snapshot whose evaluation lands in
//                 the configured normalized band
//   medium_replay the transition log accumulated up to that snapshot
//   medium_expert 50/50 concatenation of medium and expert rollouts
// Throws if training never reaches the medium band within the step budget.
GeneratedDatasets generate_tiers(const DataGenConfig& cfg, const std::vector<Tier>& wanted);

// Single-tier convenience wrapper with the spec'd signature; reference
// scores always require the trained expert, so this runs the same pipeline.
OfflineDataset generate_dataset(const std::string& env_id, Tier tier, long size, std::uint64_t seed,
                                const DataGenConfig& base);

}  // namespace o2orl
