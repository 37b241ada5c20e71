#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "o2orl/agent.hpp"
#include "o2orl/nn_io.hpp"

namespace o2orl {

// Agent checkpoint: a text header carrying the agent configuration and both
// behavior-cloning weights, followed by the network checkpoints in fixed
// order: actor, critics 0..N-1, target actor, target critics 0..N-1.
// Optimizer moments are not persisted; fine-tuning restarts Adam fresh.
template <class S>
struct AgentCheckpoint {
  Agent<S> agent;
  double alpha_offline = 0.4;
  double alpha_online = 0.4;
};

template <class S>
void save_agent(std::ostream& out, const Agent<S>& agent, double alpha_offline, double alpha_online) {
  const AgentConfig& c = agent.config();
  out << "o2orl-agent v1\n";
  out << "env_id " << agent.env().env_id << '\n';
  out << "obs_dim " << agent.env().obs_dim << '\n';
  out << "act_dim " << agent.env().act_dim << '\n';
  out << "init_seed " << agent.init_seed() << '\n';
  out << "gamma " << io::format_double(c.gamma) << '\n';
  out << "tau " << io::format_double(c.tau) << '\n';
  out << "n_critics " << c.n_critics << '\n';
  out << "m_targets " << c.m_targets << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "policy_delay " << c.policy_delay << '\n';
  out << "sigma_expl " << io::format_double(c.sigma_expl) << '\n';
  out << "sigma_policy " << io::format_double(c.sigma_policy) << '\n';
  out << "noise_clip " << io::format_double(c.noise_clip) << '\n';
  out << "ensemble_mode " << to_string(c.ensemble_mode) << '\n';
  out << "per_sample_subsets " << (c.per_sample_subsets ? 1 : 0) << '\n';
  out << "q_norm_epsilon " << io::format_double(c.q_norm_epsilon) << '\n';
  out << "q_norm_abs " << (c.q_norm_abs ? 1 : 0) << '\n';
  out << "hidden_dim " << c.hidden_dim << '\n';
  out << "lr " << io::format_double(c.adam.lr) << '\n';
  out << "adam_beta1 " << io::format_double(c.adam.beta1) << '\n';
  out << "adam_beta2 " << io::format_double(c.adam.beta2) << '\n';
  out << "adam_epsilon " << io::format_double(c.adam.epsilon) << '\n';
  out << "alpha_offline " << io::format_double(alpha_offline) << '\n';
  out << "alpha_online " << io::format_double(alpha_online) << '\n';
  out << "end\n";
  save_net(out, agent.actor());
  for (const auto& critic : agent.critics()) save_net(out, critic);
  save_net(out, agent.target_actor());
  for (const auto& critic : agent.target_critics()) save_net(out, critic);
}

template <class S>
AgentCheckpoint<S> load_agent(std::istream& in) {
  io::expect_line(in, "o2orl-agent v1", "load_agent");
  const std::string env_id = io::header_field(in, "env_id", "load_agent");
  auto read_int = [&](const char* key) {
    std::istringstream ss(io::header_field(in, key, "load_agent"));
    long v = 0;
    if (!(ss >> v)) throw std::runtime_error(std::string("load_agent: malformed ") + key);
    return v;
  };
  auto read_double = [&](const char* key) {
    std::istringstream ss(io::header_field(in, key, "load_agent"));
    double v = 0;
    if (!(ss >> v)) throw std::runtime_error(std::string("load_agent: malformed ") + key);
    return v;
  };
  const int obs_dim = static_cast<int>(read_int("obs_dim"));
  const int act_dim = static_cast<int>(read_int("act_dim"));
  std::uint64_t init_seed = 0;
  {
    std::istringstream ss(io::header_field(in, "init_seed", "load_agent"));
    if (!(ss >> init_seed)) throw std::runtime_error("load_agent: malformed init_seed");
  }
  AgentConfig config;
  config.gamma = read_double("gamma");
  config.tau = read_double("tau");
  config.n_critics = static_cast<int>(read_int("n_critics"));
  config.m_targets = static_cast<int>(read_int("m_targets"));
  config.batch_size = static_cast<int>(read_int("batch_size"));
  config.policy_delay = static_cast<int>(read_int("policy_delay"));
  config.sigma_expl = read_double("sigma_expl");
  config.sigma_policy = read_double("sigma_policy");
  config.noise_clip = read_double("noise_clip");
  config.ensemble_mode = ensemble_mode_from_string(io::header_field(in, "ensemble_mode", "load_agent"));
  config.per_sample_subsets = read_int("per_sample_subsets") != 0;
  config.q_norm_epsilon = read_double("q_norm_epsilon");
  config.q_norm_abs = read_int("q_norm_abs") != 0;
  config.hidden_dim = static_cast<int>(read_int("hidden_dim"));
  config.adam.lr = read_double("lr");
  config.adam.beta1 = read_double("adam_beta1");
  config.adam.beta2 = read_double("adam_beta2");
  config.adam.epsilon = read_double("adam_epsilon");
  const double alpha_offline = read_double("alpha_offline");
  const double alpha_online = read_double("alpha_online");
  io::expect_line(in, "end", "load_agent");

  const EnvSpec spec = make_env_spec(env_id);
  if (spec.obs_dim != obs_dim || spec.act_dim != act_dim)
    throw std::runtime_error("load_agent: checkpoint dims do not match env '" + env_id + "'");
  AgentCheckpoint<S> ckpt{Agent<S>(config, spec, init_seed), alpha_offline, alpha_online};
  ckpt.agent.actor() = load_net<S>(in);
  for (auto& critic : ckpt.agent.critics()) critic = load_net<S>(in);
  // target networks stored explicitly; load over the init copies
  DenseNet<S> target_actor = load_net<S>(in);
  std::vector<DenseNet<S>> target_critics;
  target_critics.reserve(ckpt.agent.target_critics().size());
  for (std::size_t i = 0; i < ckpt.agent.target_critics().size(); ++i) target_critics.push_back(load_net<S>(in));
  ckpt.agent.set_targets(std::move(target_actor), std::move(target_critics));
  return ckpt;
}

template <class S>
void save_agent_file(const std::string& path, const Agent<S>& agent, double alpha_offline,
                     double alpha_online) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_agent: cannot open '" + path + "' for writing");
  save_agent(out, agent, alpha_offline, alpha_online);
  if (!out) throw std::runtime_error("save_agent: write to '" + path + "' failed");
}

template <class S>
AgentCheckpoint<S> load_agent_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_agent: cannot open '" + path + "'");
  return load_agent<S>(in);
}

}  // namespace o2orl
