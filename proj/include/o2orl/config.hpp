#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "o2orl/agent.hpp"
#include "o2orl/alpha.hpp"
#include "o2orl/replay.hpp"

namespace o2orl {

// Raised for malformed invocations (unknown key, bad value, missing file);
// the CLI maps it to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text configuration: one `key = value` per line, `#` comments, dotted
// section prefixes (agent.*, alpha.*, replay.*, data.*, sweep.*). Every key
// has a schema entry with a default; unknown keys and malformed values are
// rejected naming the key.
class ConfigMap {
 public:
  static ConfigMap defaults();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // validates key and value

  const std::string& raw(const std::string& key) const;
  long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  bool is_default(const std::string& key) const;
  std::string resolved_text() const;  // all keys, sorted, final values

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> overridden_;
};

struct RunConfig {
  std::string env_id;
  std::string dataset_path;
  std::string checkpoint_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  long offline_steps = 50000;
  long online_steps = 20000;
  int updates_per_step = 5;
  long eval_interval = 5000;
  int eval_episodes = 10;
  AgentConfig agent;
  AlphaSettings alpha;
  TargetMode target_mode = TargetMode::expert_reference;
  bool alpha_adaptive = true;
  double alpha_fixed = 0.0;
  double downsample_keep = 0.05;
  DownsampleMode downsample_mode = DownsampleMode::random;
  std::size_t replay_capacity = 1100000;

  static RunConfig from(const ConfigMap& map);
};

struct DataGenConfig {
  std::string env_id;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string tier = "all";
  long size = 20000;
  long trainer_steps = 30000;
  long warmup_steps = 1000;
  long snapshot_interval = 500;
  int snapshot_eval_episodes = 10;
  int reference_episodes = 100;
  double medium_low = 0.4;
  double medium_high = 0.6;
  int trainer_updates_per_step = 1;
  AgentConfig agent;

  static DataGenConfig from(const ConfigMap& map);
};

}  // namespace o2orl
