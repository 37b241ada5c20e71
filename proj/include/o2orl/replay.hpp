#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "o2orl/dataset.hpp"
#include "o2orl/env.hpp"
#include "o2orl/rng.hpp"

namespace o2orl {

enum class Origin : std::uint8_t { offline, online };
enum class DownsampleMode { random, prioritized };

DownsampleMode downsample_mode_from_string(const std::string& name);

// Bounded FIFO transition store with uniform with-replacement minibatch
// sampling. Each entry keeps its origin tag plus the episode id and the
// episodic return of the episode it came from (known for offline data,
// used by prioritized downsampling).
class ReplayBuffer {
 public:
  struct Entry {
    Transition transition;
    Origin origin = Origin::online;
    std::int64_t episode_id = -1;
    float episodic_return = std::numeric_limits<float>::quiet_NaN();
  };

  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(const Transition& t, Origin origin, std::int64_t episode_id = -1,
            float episodic_return = std::numeric_limits<float>::quiet_NaN());

  // Loads a dataset as offline-tagged entries with per-episode returns.
  void seed_offline(const OfflineDataset& dataset);

  // Uniform i.i.d. with replacement over current contents.
  std::vector<std::size_t> sample_indices(int batch_size);

  // Keeps roughly keep_fraction of the offline-tagged entries (see modes);
  // online entries are untouched. Runs once, at the offline-to-online
  // boundary; a second call is rejected.
  void downsample(double keep_fraction, DownsampleMode mode);

  const Entry& operator[](std::size_t logical_index) const;  // 0 = oldest
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t offline_count() const;
  bool downsampled() const { return downsampled_; }
  Rng& rng() { return rng_; }

 private:
  std::size_t physical(std::size_t logical) const { return (head_ + logical) % capacity_; }

  std::vector<Entry> ring_;
  std::size_t capacity_ = 0;
  std::size_t head_ = 0;  // oldest entry
  std::size_t size_ = 0;
  bool downsampled_ = false;
  Rng rng_;
};

}  // namespace o2orl
