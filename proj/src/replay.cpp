#include "o2orl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace o2orl {

DownsampleMode downsample_mode_from_string(const std::string& name) {
  if (name == "random") return DownsampleMode::random;
  if (name == "prioritized") return DownsampleMode::prioritized;
  throw std::invalid_argument("unknown downsample mode '" + name + "'");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Transition& t, Origin origin, std::int64_t episode_id,
                        float episodic_return) {
  Entry entry{t, origin, episode_id, episodic_return};
  if (size_ < capacity_) {
    if (ring_.size() < capacity_) {
      ring_.push_back(std::move(entry));
    } else {
      ring_[physical(size_)] = std::move(entry);
    }
    ++size_;
  } else {
    ring_[head_] = std::move(entry);  // evict the oldest
    head_ = (head_ + 1) % capacity_;
  }
}

void ReplayBuffer::seed_offline(const OfflineDataset& dataset) {
  for (std::int64_t e = 0; e < dataset.n_episodes(); ++e) {
    const auto [begin, end] = dataset.episode_range(e);
    const auto ep_return = static_cast<float>(dataset.episode_return_of(e));
    for (std::int64_t i = begin; i < end; ++i)
      push(dataset.transitions[static_cast<std::size_t>(i)], Origin::offline, e, ep_return);
  }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(int batch_size) {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample_indices: buffer is empty");
  if (batch_size <= 0) throw std::invalid_argument("ReplayBuffer::sample_indices: batch size must be positive");
  std::vector<std::size_t> indices(static_cast<std::size_t>(batch_size));
  for (auto& idx : indices) idx = static_cast<std::size_t>(rng_.below(size_));
  return indices;
}

const ReplayBuffer::Entry& ReplayBuffer::operator[](std::size_t logical_index) const {
  if (logical_index >= size_) throw std::out_of_range("ReplayBuffer: index out of range");
  return ring_[physical(logical_index)];
}

std::size_t ReplayBuffer::offline_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < size_; ++i)
    if (ring_[physical(i)].origin == Origin::offline) ++count;
  return count;
}

void ReplayBuffer::downsample(double keep_fraction, DownsampleMode mode) {
  if (downsampled_)
    throw std::logic_error("ReplayBuffer::downsample: already applied; it runs once per buffer");
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    throw std::invalid_argument("ReplayBuffer::downsample: keep_fraction must be in [0, 1]");

  std::vector<std::size_t> offline;  // logical indices
  offline.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i)
    if (ring_[physical(i)].origin == Origin::offline) offline.push_back(i);
  const auto n_offline = static_cast<double>(offline.size());
  const auto target = static_cast<std::size_t>(std::floor(keep_fraction * n_offline));

  std::vector<char> keep(size_, 1);
  if (mode == DownsampleMode::random) {
    // partial Fisher-Yates: the first `target` entries become the kept set
    std::vector<std::size_t> pool = offline;
    for (std::size_t i = 0; i < target && i + 1 < pool.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i : offline) keep[i] = 0;
    for (std::size_t i = 0; i < target; ++i) keep[pool[i]] = 1;
  } else {
    struct Trajectory {
      std::int64_t episode_id;
      float episodic_return;
      std::vector<std::size_t> indices;
    };
    std::vector<Trajectory> trajectories;
    for (std::size_t i : offline) {
      const Entry& e = ring_[physical(i)];
      if (std::isnan(e.episodic_return))
        throw std::logic_error("ReplayBuffer::downsample: prioritized mode needs episodic returns");
      if (trajectories.empty() || trajectories.back().episode_id != e.episode_id)
        trajectories.push_back({e.episode_id, e.episodic_return, {}});
      trajectories.back().indices.push_back(i);
    }
    std::stable_sort(trajectories.begin(), trajectories.end(),
                     [](const Trajectory& a, const Trajectory& b) { return a.episodic_return > b.episodic_return; });
    for (std::size_t i : offline) keep[i] = 0;
    std::size_t kept = 0;
    for (const Trajectory& traj : trajectories) {
      if (kept >= target) break;  // whole trajectories until the target count is first reached
      for (std::size_t i : traj.indices) keep[i] = 1;
      kept += traj.indices.size();
    }
  }

  std::vector<Entry> survivors;
  survivors.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i)
    if (keep[i]) survivors.push_back(std::move(ring_[physical(i)]));
  ring_ = std::move(survivors);
  head_ = 0;
  size_ = ring_.size();
  ring_.reserve(std::min(capacity_, size_ + 1024));
  downsampled_ = true;
}

}  // namespace o2orl
