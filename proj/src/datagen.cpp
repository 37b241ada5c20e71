#include "o2orl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "o2orl/agent.hpp"
#include "o2orl/train.hpp"

namespace o2orl {

namespace {

struct RolloutLog {
  std::vector<Transition> transitions;
  std::vector<std::int64_t> episode_starts;
};

// Rolls episodes until exactly `size` transitions exist; the last episode may
// be cut short, which keeps the boundary markers a valid partition.
template <class Policy>
RolloutLog rollout(const EnvSpec& spec, Policy&& policy, long size, std::uint64_t seed) {
  RolloutLog log;
  log.transitions.reserve(static_cast<std::size_t>(size));
  Env env(spec, seed);
  while (static_cast<long>(log.transitions.size()) < size) {
    log.episode_starts.push_back(static_cast<std::int64_t>(log.transitions.size()));
    VectorXd obs = env.reset();
    while (static_cast<long>(log.transitions.size()) < size) {
      const VectorXd action = policy(obs);
      const StepResult step = env.step(action);
      Transition t;
      t.obs = obs.cast<float>();
      t.action = action.cast<float>();
      t.next_obs = step.obs.cast<float>();
      t.reward = static_cast<float>(step.reward);
      t.terminal = step.terminal;
      log.transitions.push_back(std::move(t));
      if (step.terminal || step.truncated) break;
      obs = step.obs;
    }
  }
  return log;
}

OfflineDataset make_dataset(const EnvSpec& spec, Tier tier, const ReferenceScores& refs,
                            std::uint64_t seed, RolloutLog log) {
  OfflineDataset ds;
  ds.env_id = spec.env_id;
  ds.tier = tier;
  ds.obs_dim = spec.obs_dim;
  ds.act_dim = spec.act_dim;
  ds.max_episode_steps = spec.max_episode_steps;
  ds.r_max = spec.r_max;
  ds.refs = refs;
  ds.seed = seed;
  ds.transitions = std::move(log.transitions);
  ds.episode_starts = std::move(log.episode_starts);
  ds.validate();
  return ds;
}

}  // namespace

GeneratedDatasets generate_tiers(const DataGenConfig& cfg, const std::vector<Tier>& wanted) {
  const EnvSpec spec = make_env_spec(cfg.env_id);
  const std::uint64_t data_seed = derive_seed(cfg.seed, "data");

  // --- train the reference agent online, no behavior cloning ---
  Agent<float> agent(cfg.agent, spec, derive_seed(data_seed, "init"));
  ReplayBuffer buffer(static_cast<std::size_t>(std::max<long>(cfg.trainer_steps, 1)),
                      derive_seed(data_seed, "minibatch"));
  Rng subset_rng(derive_seed(data_seed, "ensemble-subset"));
  Rng noise_rng(derive_seed(data_seed, "target-noise"));
  Rng expl_rng(derive_seed(data_seed, "exploration"));
  Rng warmup_rng(derive_seed(data_seed, "warmup"));
  const std::uint64_t eval_seed = derive_seed(data_seed, "eval");
  std::uint64_t eval_counter = 0;

  struct Snapshot {
    long step;
    double eval_mean;
    DenseNet<float> actor;
    std::size_t log_size;
  };
  std::vector<Snapshot> snapshots;
  RolloutLog train_log;
  const VectorXd sigma = agent.exploration_sigma();

  Env env(spec, derive_seed(data_seed, "env"));
  VectorXd obs = env.reset();
  train_log.episode_starts.push_back(0);
  long critic_updates = 0;
  for (long t = 1; t <= cfg.trainer_steps; ++t) {
    VectorXd action(spec.act_dim);
    if (t <= cfg.warmup_steps) {
      for (int d = 0; d < spec.act_dim; ++d)
        action(d) = warmup_rng.uniform(spec.action_low(d), spec.action_high(d));
    } else {
      action = select_action(agent.actor(), obs, sigma, expl_rng, spec.action_low, spec.action_high);
    }
    const StepResult step = env.step(action);
    Transition transition;
    transition.obs = obs.cast<float>();
    transition.action = action.cast<float>();
    transition.next_obs = step.obs.cast<float>();
    transition.reward = static_cast<float>(step.reward);
    transition.terminal = step.terminal;
    buffer.push(transition, Origin::online);
    train_log.transitions.push_back(std::move(transition));

    if (t > cfg.warmup_steps) {
      for (int g = 0; g < cfg.trainer_updates_per_step; ++g) {
        const auto indices = buffer.sample_indices(cfg.agent.batch_size);
        const Batch<float> batch = gather_batch<float>(buffer, indices);
        const double loss = agent.critic_update(batch, noise_rng, subset_rng);
        if (!std::isfinite(loss))
          throw std::runtime_error("dataset generation: non-finite critic loss at step " +
                                   std::to_string(t));
        ++critic_updates;
        if (critic_updates % cfg.agent.policy_delay == 0) {
          agent.actor_update(batch, 0.0);
          agent.polyak_targets();
        }
      }
    }
    if (step.terminal || step.truncated) {
      obs = env.reset();
      if (t < cfg.trainer_steps)
        train_log.episode_starts.push_back(static_cast<std::int64_t>(train_log.transitions.size()));
    } else {
      obs = step.obs;
    }
    if (t % cfg.snapshot_interval == 0 && t > cfg.warmup_steps) {
      const EvalStats stats = evaluate_policy(agent.actor(), spec, cfg.snapshot_eval_episodes,
                                              derive_seed(eval_seed, eval_counter++));
      snapshots.push_back({t, stats.mean, agent.actor(), train_log.transitions.size()});
    }
  }

  // --- reference scores from the trained expert and the uniform policy ---
  GeneratedDatasets out;
  out.trainer_trace.reserve(snapshots.size());
  for (const Snapshot& snap : snapshots) out.trainer_trace.push_back({snap.step, snap.eval_mean});
  const EvalStats expert_eval = evaluate_policy(agent.actor(), spec, cfg.reference_episodes,
                                                derive_seed(data_seed, "refs-expert"));
  const EvalStats random_eval =
      evaluate_random_policy(spec, cfg.reference_episodes, derive_seed(data_seed, "refs-random"));
  out.expert_eval_mean = expert_eval.mean;
  out.random_eval_mean = random_eval.mean;
  out.refs.r_random = random_eval.mean;
  out.refs.r_expert = expert_eval.mean;
  out.refs.rmax_times_t = spec.r_max * spec.max_episode_steps;
  out.refs.n_reference_episodes = cfg.reference_episodes;
  out.refs.validate();

  // --- retro-pick the first snapshot inside the medium band ---
  const Snapshot* medium = nullptr;
  for (const Snapshot& snap : snapshots) {
    const double norm = normalize_return(snap.eval_mean, out.refs);
    if (norm >= cfg.medium_low && norm <= cfg.medium_high) {
      medium = &snap;
      out.medium_snapshot_step = snap.step;
      out.medium_snapshot_norm = norm;
      break;
    }
  }
  const auto needs_medium = [&](Tier tier) {
    return tier == Tier::medium || tier == Tier::medium_replay || tier == Tier::medium_expert;
  };
  for (Tier tier : wanted) {
    if (needs_medium(tier) && medium == nullptr) {
      std::string trace = "; snapshot normalized evals:";
      for (std::size_t i = 0; i < snapshots.size(); i += std::max<std::size_t>(1, snapshots.size() / 20))
        trace += " " + std::to_string(normalize_return(snapshots[i].eval_mean, out.refs));
      throw std::runtime_error(
          "dataset generation: training never reached the medium band [" +
          std::to_string(cfg.medium_low) + ", " + std::to_string(cfg.medium_high) + "] within " +
          std::to_string(cfg.trainer_steps) + " steps; no dataset written" + trace);
    }
  }

  // --- cut the tiers ---
  for (Tier tier : wanted) {
    switch (tier) {
      case Tier::random: {
        Rng rollout_rng(derive_seed(data_seed, "rollout-random-actions"));
        auto policy = [&](const VectorXd&) {
          VectorXd a(spec.act_dim);
          for (int d = 0; d < spec.act_dim; ++d)
            a(d) = rollout_rng.uniform(spec.action_low(d), spec.action_high(d));
          return a;
        };
        out.tiers.emplace(tier, make_dataset(spec, tier, out.refs, cfg.seed,
                                             rollout(spec, policy, cfg.size,
                                                     derive_seed(data_seed, "rollout-random"))));
        break;
      }
      case Tier::expert:
      case Tier::medium: {
        const DenseNet<float>& actor = tier == Tier::expert ? agent.actor() : medium->actor;
        Rng unused(0);
        const VectorXd zero_sigma = VectorXd::Zero(spec.act_dim);
        auto policy = [&](const VectorXd& o) {
          return select_action(actor, o, zero_sigma, unused, spec.action_low, spec.action_high);
        };
        const char* stream = tier == Tier::expert ? "rollout-expert" : "rollout-medium";
        out.tiers.emplace(tier, make_dataset(spec, tier, out.refs, cfg.seed,
                                             rollout(spec, policy, cfg.size, derive_seed(data_seed, stream))));
        break;
      }
      case Tier::medium_expert: {
        const long half = cfg.size / 2;
        Rng unused(0);
        const VectorXd zero_sigma = VectorXd::Zero(spec.act_dim);
        auto medium_policy = [&](const VectorXd& o) {
          return select_action(medium->actor, o, zero_sigma, unused, spec.action_low, spec.action_high);
        };
        auto expert_policy = [&](const VectorXd& o) {
          return select_action(agent.actor(), o, zero_sigma, unused, spec.action_low, spec.action_high);
        };
        RolloutLog mixed = rollout(spec, medium_policy, half, derive_seed(data_seed, "rollout-me-medium"));
        RolloutLog expert_part =
            rollout(spec, expert_policy, cfg.size - half, derive_seed(data_seed, "rollout-me-expert"));
        const auto offset = static_cast<std::int64_t>(mixed.transitions.size());
        for (std::int64_t s : expert_part.episode_starts) mixed.episode_starts.push_back(s + offset);
        mixed.transitions.insert(mixed.transitions.end(),
                                 std::make_move_iterator(expert_part.transitions.begin()),
                                 std::make_move_iterator(expert_part.transitions.end()));
        out.tiers.emplace(tier, make_dataset(spec, tier, out.refs, cfg.seed, std::move(mixed)));
        break;
      }
      case Tier::medium_replay: {
        // everything the trainer had seen by the medium snapshot, most
        // recent `size` transitions if that log is longer
        RolloutLog log;
        const std::size_t end = medium->log_size;
        const std::size_t begin = end > static_cast<std::size_t>(cfg.size)
                                      ? end - static_cast<std::size_t>(cfg.size)
                                      : 0;
        log.transitions.assign(train_log.transitions.begin() + static_cast<std::ptrdiff_t>(begin),
                               train_log.transitions.begin() + static_cast<std::ptrdiff_t>(end));
        log.episode_starts.push_back(0);
        for (std::int64_t s : train_log.episode_starts)
          if (s > static_cast<std::int64_t>(begin) && s < static_cast<std::int64_t>(end))
            log.episode_starts.push_back(s - static_cast<std::int64_t>(begin));
        out.tiers.emplace(tier, make_dataset(spec, tier, out.refs, cfg.seed, std::move(log)));
        break;
      }
    }
  }
  return out;
}

OfflineDataset generate_dataset(const std::string& env_id, Tier tier, long size, std::uint64_t seed,
                                const DataGenConfig& base) {
  DataGenConfig cfg = base;
  cfg.env_id = env_id;
  cfg.size = size;
  cfg.seed = seed;
  GeneratedDatasets all = generate_tiers(cfg, {tier});
  return std::move(all.tiers.at(tier));
}

}  // namespace o2orl
