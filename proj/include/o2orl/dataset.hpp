#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "o2orl/env.hpp"

namespace o2orl {

enum class Tier { random, medium, medium_replay, medium_expert, expert };

std::string to_string(Tier tier);
Tier tier_from_string(const std::string& name);

// Anchors for D4RL-style return normalization: 0 corresponds to the mean
// return of the uniform-random policy and 1 to the trained expert.
struct ReferenceScores {
  double r_random = 0.0;
  double r_expert = 0.0;
  double rmax_times_t = 0.0;
  int n_reference_episodes = 0;

  void validate() const;
};

// Unit-scale normalized return (not x100): (r - R_random) / (R_expert - R_random).
double normalize_return(double episodic_return, const ReferenceScores& refs);

struct OfflineDataset {
  std::string env_id;
  Tier tier = Tier::random;
  int obs_dim = 0;
  int act_dim = 0;
  int max_episode_steps = 0;
  double r_max = 0.0;
  ReferenceScores refs;
  std::uint64_t seed = 0;
  std::vector<Transition> transitions;
  std::vector<std::int64_t> episode_starts;  // ascending, first is 0; markers partition transitions

  std::int64_t size() const { return static_cast<std::int64_t>(transitions.size()); }
  std::int64_t n_episodes() const { return static_cast<std::int64_t>(episode_starts.size()); }
  std::pair<std::int64_t, std::int64_t> episode_range(std::int64_t episode) const;
  double episode_return_of(std::int64_t episode) const;
  double mean_normalized_return() const;
  void validate() const;
};

void save_dataset(const std::string& path, const OfflineDataset& dataset);
OfflineDataset load_dataset(const std::string& path);

}  // namespace o2orl
