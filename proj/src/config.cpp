#include "o2orl/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace o2orl {

namespace {

enum class KeyType { integer, unsigned64, real, boolean, text, real_list };

struct KeySpec {
  const char* key;
  KeyType type;
  const char* default_value;
  const char* allowed;  // comma-separated choices for text keys, nullptr = free
};

// The full key set; resolved configs list every key with its final value.
constexpr std::array<KeySpec, 52> kSchema{{
    {"env_id", KeyType::text, "pendulum", "pendulum,pointmass"},
    {"seed", KeyType::unsigned64, "0", nullptr},
    {"output_dir", KeyType::text, "out", nullptr},
    {"dataset", KeyType::text, "", nullptr},
    {"checkpoint", KeyType::text, "", nullptr},
    {"offline_steps", KeyType::integer, "50000", nullptr},
    {"online_steps", KeyType::integer, "20000", nullptr},
    {"updates_per_step", KeyType::integer, "5", nullptr},
    {"eval_interval", KeyType::integer, "5000", nullptr},
    {"eval_episodes", KeyType::integer, "10", nullptr},

    {"agent.gamma", KeyType::real, "0.99", nullptr},
    {"agent.tau", KeyType::real, "0.005", nullptr},
    {"agent.n_critics", KeyType::integer, "10", nullptr},
    {"agent.m_targets", KeyType::integer, "2", nullptr},
    {"agent.batch_size", KeyType::integer, "256", nullptr},
    {"agent.policy_delay", KeyType::integer, "2", nullptr},
    {"agent.sigma_expl", KeyType::real, "0.1", nullptr},
    {"agent.sigma_policy", KeyType::real, "0.2", nullptr},
    {"agent.noise_clip", KeyType::real, "0.5", nullptr},
    {"agent.ensemble_mode", KeyType::text, "redq_random_pair", "redq_random_pair,full_min,twin"},
    {"agent.per_sample_subsets", KeyType::boolean, "false", nullptr},
    {"agent.q_norm_epsilon", KeyType::real, "1e-6", nullptr},
    {"agent.q_norm_abs", KeyType::boolean, "true", nullptr},
    {"agent.hidden_dim", KeyType::integer, "256", nullptr},
    {"agent.lr", KeyType::real, "3e-4", nullptr},
    {"agent.adam_beta1", KeyType::real, "0.9", nullptr},
    {"agent.adam_beta2", KeyType::real, "0.999", nullptr},
    {"agent.adam_epsilon", KeyType::real, "1e-8", nullptr},
    {"agent.threads", KeyType::integer, "0", nullptr},

    {"alpha.offline", KeyType::real, "0.4", nullptr},
    {"alpha.mode", KeyType::text, "adaptive", "adaptive,fixed"},
    {"alpha.fixed_value", KeyType::real, "0.0", nullptr},
    {"alpha.kp", KeyType::real, "0.003", nullptr},
    {"alpha.kd", KeyType::real, "0.1", nullptr},
    {"alpha.target_mode", KeyType::text, "expert_reference", "expert_reference,rmax_times_T"},
    {"alpha.r_target", KeyType::real, "1.05", nullptr},
    {"alpha.ema_beta", KeyType::real, "0.1", nullptr},

    {"replay.capacity", KeyType::integer, "1100000", nullptr},
    {"replay.downsample_keep", KeyType::real, "0.05", nullptr},
    {"replay.downsample_mode", KeyType::text, "random", "random,prioritized"},

    {"data.tier", KeyType::text, "all", "all,random,medium,medium_replay,medium_expert,expert"},
    {"data.size", KeyType::integer, "20000", nullptr},
    {"data.trainer_steps", KeyType::integer, "30000", nullptr},
    {"data.warmup_steps", KeyType::integer, "1000", nullptr},
    {"data.snapshot_interval", KeyType::integer, "500", nullptr},
    {"data.snapshot_eval_episodes", KeyType::integer, "10", nullptr},
    {"data.reference_episodes", KeyType::integer, "100", nullptr},
    {"data.medium_low", KeyType::real, "0.4", nullptr},
    {"data.medium_high", KeyType::real, "0.6", nullptr},
    {"data.trainer_updates_per_step", KeyType::integer, "1", nullptr},

    {"sweep.parameter", KeyType::text, "alpha", "alpha,gains"},
    {"sweep.alpha_values", KeyType::real_list, "0,0.1,0.3", nullptr},
}};

// kp/kd grids live outside the array aggregate above to keep it at a round
// size; registered through an overflow list.
constexpr std::array<KeySpec, 2> kSchemaExtra{{
    {"sweep.kp_values", KeyType::real_list, "0.001,0.003,0.01", nullptr},
    {"sweep.kd_values", KeyType::real_list, "0.03,0.1,0.3", nullptr},
}};

const KeySpec* find_spec(const std::string& key) {
  for (const auto& spec : kSchema)
    if (key == spec.key) return &spec;
  for (const auto& spec : kSchemaExtra)
    if (key == spec.key) return &spec;
  return nullptr;
}

template <class Fn>
void for_each_spec(Fn&& fn) {
  for (const auto& spec : kSchema) fn(spec);
  for (const auto& spec : kSchemaExtra) fn(spec);
}

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

void check_value(const KeySpec& spec, const std::string& value) {
  const auto fail = [&](const char* why) {
    throw UsageError(std::string("invalid value for key '") + spec.key + "': '" + value + "' (" + why + ")");
  };
  std::istringstream ss(value);
  switch (spec.type) {
    case KeyType::integer: {
      long v;
      if (!(ss >> v) || !(ss >> std::ws).eof()) fail("expected an integer");
      break;
    }
    case KeyType::unsigned64: {
      std::uint64_t v;
      if (!value.empty() && value[0] == '-') fail("expected a non-negative integer");
      if (!(ss >> v) || !(ss >> std::ws).eof()) fail("expected a non-negative integer");
      break;
    }
    case KeyType::real: {
      double v;
      if (!(ss >> v) || !(ss >> std::ws).eof()) fail("expected a number");
      break;
    }
    case KeyType::boolean:
      if (value != "true" && value != "false" && value != "0" && value != "1")
        fail("expected true/false");
      break;
    case KeyType::real_list: {
      std::stringstream items(value);
      std::string item;
      bool any = false;
      while (std::getline(items, item, ',')) {
        std::istringstream is(trim(item));
        double v;
        if (!(is >> v) || !(is >> std::ws).eof()) fail("expected comma-separated numbers");
        any = true;
      }
      if (!any) fail("expected comma-separated numbers");
      break;
    }
    case KeyType::text:
      if (spec.allowed) {
        std::stringstream choices(spec.allowed);
        std::string choice;
        while (std::getline(choices, choice, ','))
          if (value == choice) return;
        fail((std::string("expected one of: ") + spec.allowed).c_str());
      }
      break;
  }
}

}  // namespace

ConfigMap ConfigMap::defaults() {
  ConfigMap map;
  for_each_spec([&](const KeySpec& spec) {
    map.values_[spec.key] = spec.default_value;
    map.overridden_[spec.key] = false;
  });
  return map;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw UsageError("unknown config key '" + key + "'");
  check_value(*spec, value);
  values_[key] = value;
  overridden_[key] = true;
}

void ConfigMap::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("missing config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError("config file '" + path + "' line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

const std::string& ConfigMap::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

long ConfigMap::get_int(const std::string& key) const {
  return std::stol(raw(key));
}

std::uint64_t ConfigMap::get_u64(const std::string& key) const {
  return std::stoull(raw(key));
}

double ConfigMap::get_double(const std::string& key) const {
  return std::stod(raw(key));
}

bool ConfigMap::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  return v == "true" || v == "1";
}

const std::string& ConfigMap::get_string(const std::string& key) const { return raw(key); }

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream items(raw(key));
  std::string item;
  while (std::getline(items, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

bool ConfigMap::is_default(const std::string& key) const {
  const auto it = overridden_.find(key);
  if (it == overridden_.end()) throw UsageError("unknown config key '" + key + "'");
  return !it->second;
}

std::string ConfigMap::resolved_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
  return out.str();
}

namespace {
AgentConfig agent_config_from(const ConfigMap& map) {
  AgentConfig agent;
  agent.gamma = map.get_double("agent.gamma");
  agent.tau = map.get_double("agent.tau");
  agent.n_critics = static_cast<int>(map.get_int("agent.n_critics"));
  agent.m_targets = static_cast<int>(map.get_int("agent.m_targets"));
  agent.batch_size = static_cast<int>(map.get_int("agent.batch_size"));
  agent.policy_delay = static_cast<int>(map.get_int("agent.policy_delay"));
  agent.sigma_expl = map.get_double("agent.sigma_expl");
  agent.sigma_policy = map.get_double("agent.sigma_policy");
  agent.noise_clip = map.get_double("agent.noise_clip");
  agent.ensemble_mode = ensemble_mode_from_string(map.get_string("agent.ensemble_mode"));
  agent.per_sample_subsets = map.get_bool("agent.per_sample_subsets");
  agent.q_norm_epsilon = map.get_double("agent.q_norm_epsilon");
  agent.q_norm_abs = map.get_bool("agent.q_norm_abs");
  agent.hidden_dim = static_cast<int>(map.get_int("agent.hidden_dim"));
  agent.adam.lr = map.get_double("agent.lr");
  agent.adam.beta1 = map.get_double("agent.adam_beta1");
  agent.adam.beta2 = map.get_double("agent.adam_beta2");
  agent.adam.epsilon = map.get_double("agent.adam_epsilon");
  agent.threads = static_cast<int>(map.get_int("agent.threads"));
  agent.validate();
  return agent;
}
}  // namespace

RunConfig RunConfig::from(const ConfigMap& map) {
  RunConfig cfg;
  cfg.env_id = map.get_string("env_id");
  cfg.dataset_path = map.get_string("dataset");
  cfg.checkpoint_path = map.get_string("checkpoint");
  cfg.output_dir = map.get_string("output_dir");
  cfg.seed = map.get_u64("seed");
  cfg.offline_steps = map.get_int("offline_steps");
  cfg.online_steps = map.get_int("online_steps");
  cfg.updates_per_step = static_cast<int>(map.get_int("updates_per_step"));
  cfg.eval_interval = map.get_int("eval_interval");
  cfg.eval_episodes = static_cast<int>(map.get_int("eval_episodes"));
  if (cfg.offline_steps < 0 || cfg.online_steps < 0 || cfg.updates_per_step < 0)
    throw UsageError("invalid value for key 'offline_steps'/'online_steps'/'updates_per_step': must be >= 0");
  if (cfg.eval_interval < 1) throw UsageError("invalid value for key 'eval_interval': must be >= 1");
  if (cfg.eval_episodes < 1) throw UsageError("invalid value for key 'eval_episodes': must be >= 1");
  cfg.agent = agent_config_from(map);
  cfg.alpha.alpha_offline = map.get_double("alpha.offline");
  cfg.alpha.kp = map.get_double("alpha.kp");
  cfg.alpha.kd = map.get_double("alpha.kd");
  cfg.alpha.r_target = map.get_double("alpha.r_target");
  cfg.alpha.ema_beta = map.get_double("alpha.ema_beta");
  cfg.alpha.validate();
  cfg.target_mode = target_mode_from_string(map.get_string("alpha.target_mode"));
  cfg.alpha_adaptive = map.get_string("alpha.mode") == "adaptive";
  cfg.alpha_fixed = map.get_double("alpha.fixed_value");
  cfg.downsample_keep = map.get_double("replay.downsample_keep");
  cfg.downsample_mode = downsample_mode_from_string(map.get_string("replay.downsample_mode"));
  const long capacity = map.get_int("replay.capacity");
  if (capacity < 1) throw UsageError("invalid value for key 'replay.capacity': must be >= 1");
  cfg.replay_capacity = static_cast<std::size_t>(capacity);
  return cfg;
}

DataGenConfig DataGenConfig::from(const ConfigMap& map) {
  DataGenConfig cfg;
  cfg.env_id = map.get_string("env_id");
  cfg.output_dir = map.get_string("output_dir");
  cfg.seed = map.get_u64("seed");
  cfg.tier = map.get_string("data.tier");
  cfg.size = map.get_int("data.size");
  cfg.trainer_steps = map.get_int("data.trainer_steps");
  cfg.warmup_steps = map.get_int("data.warmup_steps");
  cfg.snapshot_interval = map.get_int("data.snapshot_interval");
  cfg.snapshot_eval_episodes = static_cast<int>(map.get_int("data.snapshot_eval_episodes"));
  cfg.reference_episodes = static_cast<int>(map.get_int("data.reference_episodes"));
  cfg.medium_low = map.get_double("data.medium_low");
  cfg.medium_high = map.get_double("data.medium_high");
  cfg.trainer_updates_per_step = static_cast<int>(map.get_int("data.trainer_updates_per_step"));
  cfg.agent = agent_config_from(map);
  if (cfg.size < 1) throw UsageError("invalid value for key 'data.size': must be >= 1");
  if (cfg.snapshot_interval < 1)
    throw UsageError("invalid value for key 'data.snapshot_interval': must be >= 1");
  if (!(cfg.medium_low < cfg.medium_high))
    throw UsageError("invalid value for key 'data.medium_low': must be below data.medium_high");
  return cfg;
}

}  // namespace o2orl
