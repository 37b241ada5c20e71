#include "o2orl/agent.hpp"

#include <stdexcept>
#include <thread>

namespace o2orl {

EnsembleMode ensemble_mode_from_string(const std::string& name) {
  if (name == "redq_random_pair") return EnsembleMode::redq_random_pair;
  if (name == "full_min") return EnsembleMode::full_min;
  if (name == "twin") return EnsembleMode::twin;
  throw std::invalid_argument("unknown ensemble mode '" + name + "'");
}

std::string to_string(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::redq_random_pair: return "redq_random_pair";
    case EnsembleMode::full_min: return "full_min";
    case EnsembleMode::twin: return "twin";
  }
  throw std::logic_error("to_string(EnsembleMode): invalid mode");
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma must be in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("AgentConfig: tau must be in (0, 1]");
  if (n_critics < 1) throw std::invalid_argument("AgentConfig: n_critics must be >= 1");
  if (m_targets < 1 || m_targets > n_critics)
    throw std::invalid_argument("AgentConfig: m_targets must be in [1, n_critics]");
  if (batch_size < 1) throw std::invalid_argument("AgentConfig: batch_size must be >= 1");
  if (policy_delay < 1) throw std::invalid_argument("AgentConfig: policy_delay must be >= 1");
  if (sigma_expl < 0.0 || sigma_policy < 0.0 || noise_clip < 0.0)
    throw std::invalid_argument("AgentConfig: noise scales must be >= 0");
  if (q_norm_epsilon <= 0.0) throw std::invalid_argument("AgentConfig: q_norm_epsilon must be > 0");
  if (hidden_dim < 1) throw std::invalid_argument("AgentConfig: hidden_dim must be >= 1");
  if (ensemble_mode == EnsembleMode::twin && n_critics < 2 && m_targets > 1)
    throw std::invalid_argument("AgentConfig: twin mode needs at least 2 critics");
}

int AgentConfig::resolved_threads() const {
  int t = threads;
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  return std::min(t, n_critics);
}

}  // namespace o2orl
