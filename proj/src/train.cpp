#include "o2orl/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace o2orl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EvalStats stats_from_returns(std::vector<double> returns) {
  EvalStats stats;
  stats.returns = std::move(returns);
  const auto n = static_cast<double>(stats.returns.size());
  for (double r : stats.returns) stats.mean += r;
  stats.mean /= n;
  double var = 0.0;
  for (double r : stats.returns) var += (r - stats.mean) * (r - stats.mean);
  stats.stddev = std::sqrt(var / n);
  return stats;
}

void check_finite(double value, const char* what, const std::string& phase, long step) {
  if (!std::isfinite(value))
    throw std::runtime_error("non-finite " + std::string(what) + " at " + phase + " step " +
                             std::to_string(step) + "; aborting run");
}

}  // namespace

CurveRow::CurveRow()
    : episode_return(kNaN),
      episode_return_norm(kNaN),
      alpha(kNaN),
      r_avg(kNaN),
      eval_mean(kNaN),
      eval_std(kNaN),
      eval_mean_norm(kNaN),
      td_loss(kNaN) {}

EvalStats evaluate_policy(const DenseNet<float>& actor, const EnvSpec& spec, int episodes,
                          std::uint64_t seed) {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  const VectorXd zero_sigma = VectorXd::Zero(spec.act_dim);
  Rng unused(0);
  for (int e = 0; e < episodes; ++e) {
    Env env(spec, derive_seed(seed, static_cast<std::uint64_t>(e)));
    VectorXd obs = env.reset();
    double total = 0.0;
    while (true) {
      const VectorXd action =
          select_action(actor, obs, zero_sigma, unused, spec.action_low, spec.action_high);
      const StepResult result = env.step(action);
      total += result.reward;
      if (result.terminal || result.truncated) break;
      obs = result.obs;
    }
    returns.push_back(total);
  }
  return stats_from_returns(std::move(returns));
}

EvalStats evaluate_random_policy(const EnvSpec& spec, int episodes, std::uint64_t seed) {
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    Env env(spec, derive_seed(seed, static_cast<std::uint64_t>(e)));
    Rng action_rng(derive_seed(derive_seed(seed, "actions"), static_cast<std::uint64_t>(e)));
    env.reset();
    double total = 0.0;
    while (true) {
      VectorXd action(spec.act_dim);
      for (int d = 0; d < spec.act_dim; ++d)
        action(d) = action_rng.uniform(spec.action_low(d), spec.action_high(d));
      const StepResult result = env.step(action);
      total += result.reward;
      if (result.terminal || result.truncated) break;
    }
    returns.push_back(total);
  }
  return stats_from_returns(std::move(returns));
}

TrainResult pretrain_offline(const RunConfig& cfg, const OfflineDataset& dataset, Agent<float>& agent) {
  if (dataset.env_id != cfg.env_id)
    throw std::runtime_error("dataset env '" + dataset.env_id + "' does not match configured env '" +
                             cfg.env_id + "'");
  const EnvSpec spec = make_env_spec(cfg.env_id);
  const auto start = Clock::now();

  ReplayBuffer buffer(cfg.replay_capacity, derive_seed(cfg.seed, "minibatch"));
  buffer.seed_offline(dataset);

  Rng subset_rng(derive_seed(cfg.seed, "ensemble-subset"));
  Rng noise_rng(derive_seed(cfg.seed, "target-noise"));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, "eval");
  std::uint64_t eval_counter = 0;

  TrainResult result;
  double loss_accum = 0.0;
  long loss_count = 0;
  const double alpha = cfg.alpha.alpha_offline;

  auto eval_row = [&](long step) {
    const EvalStats stats =
        evaluate_policy(agent.actor(), spec, cfg.eval_episodes, derive_seed(eval_seed, eval_counter++));
    CurveRow row;
    row.phase = "offline";
    row.step = step;
    row.alpha = alpha;
    row.eval_mean = stats.mean;
    row.eval_std = stats.stddev;
    row.eval_mean_norm = normalize_return(stats.mean, dataset.refs);
    row.td_loss = loss_count > 0 ? loss_accum / static_cast<double>(loss_count) : kNaN;
    loss_accum = 0.0;
    loss_count = 0;
    result.curve.push_back(row);
    result.timing.push_back({"offline", step, seconds_since(start)});
    return row.eval_mean_norm;
  };

  result.initial_eval_norm = eval_row(0);
  for (long k = 1; k <= cfg.offline_steps; ++k) {
    const auto indices = buffer.sample_indices(cfg.agent.batch_size);
    const Batch<float> batch = gather_batch<float>(buffer, indices);
    const double loss = agent.critic_update(batch, noise_rng, subset_rng);
    check_finite(loss, "critic loss", "offline", k);
    loss_accum += loss;
    ++loss_count;
    ++result.critic_updates;
    if (result.critic_updates % cfg.agent.policy_delay == 0) {
      const auto terms = agent.actor_update(batch, alpha);
      check_finite(terms.objective(), "actor objective", "offline", k);
      agent.polyak_targets();
      ++result.actor_updates;
      ++result.target_updates;
    }
    if (k % cfg.eval_interval == 0) result.final_eval_norm = eval_row(k);
  }
  if (result.curve.size() == 1) result.final_eval_norm = result.initial_eval_norm;
  result.final_alpha = alpha;
  return result;
}

TrainResult finetune_online(const RunConfig& cfg, const OfflineDataset& dataset, Agent<float>& agent,
                            double initial_alpha) {
  if (dataset.env_id != cfg.env_id)
    throw std::runtime_error("dataset env '" + dataset.env_id + "' does not match configured env '" +
                             cfg.env_id + "'");
  const EnvSpec spec = make_env_spec(cfg.env_id);
  const auto start = Clock::now();

  ReplayBuffer buffer(cfg.replay_capacity, derive_seed(cfg.seed, "minibatch"));
  buffer.seed_offline(dataset);
  buffer.downsample(cfg.downsample_keep, cfg.downsample_mode);

  Rng subset_rng(derive_seed(cfg.seed, "ensemble-subset"));
  Rng noise_rng(derive_seed(cfg.seed, "target-noise"));
  Rng expl_rng(derive_seed(cfg.seed, "exploration"));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, "eval");
  std::uint64_t eval_counter = 0;

  AlphaSettings alpha_settings = cfg.alpha;
  alpha_settings.r_target = resolve_target(cfg.target_mode, dataset.refs, cfg.alpha.r_target);
  AlphaController controller(alpha_settings, cfg.alpha_adaptive ? initial_alpha : 0.0);
  double alpha = cfg.alpha_adaptive ? controller.alpha() : cfg.alpha_fixed;

  TrainResult result;
  double loss_accum = 0.0;
  long loss_count = 0;

  auto eval_row = [&](long step) {
    const EvalStats stats =
        evaluate_policy(agent.actor(), spec, cfg.eval_episodes, derive_seed(eval_seed, eval_counter++));
    CurveRow row;
    row.phase = "online";
    row.step = step;
    row.alpha = alpha;
    row.r_avg = controller.has_observation() ? controller.r_avg() : kNaN;
    row.eval_mean = stats.mean;
    row.eval_std = stats.stddev;
    row.eval_mean_norm = normalize_return(stats.mean, dataset.refs);
    row.td_loss = loss_count > 0 ? loss_accum / static_cast<double>(loss_count) : kNaN;
    loss_accum = 0.0;
    loss_count = 0;
    result.curve.push_back(row);
    result.timing.push_back({"online", step, seconds_since(start)});
    return row.eval_mean_norm;
  };

  result.initial_eval_norm = eval_row(0);
  result.final_eval_norm = result.initial_eval_norm;

  Env env(spec, derive_seed(cfg.seed, "env"));
  VectorXd obs = env.reset();
  const VectorXd sigma = agent.exploration_sigma();
  double episode_return_accum = 0.0;
  std::int64_t episode_id = 0;

  for (long t = 1; t <= cfg.online_steps; ++t) {
    const VectorXd action =
        select_action(agent.actor(), obs, sigma, expl_rng, spec.action_low, spec.action_high);
    const StepResult step = env.step(action);
    Transition transition;
    transition.obs = obs.cast<float>();
    transition.action = action.cast<float>();
    transition.next_obs = step.obs.cast<float>();
    transition.reward = static_cast<float>(step.reward);
    transition.terminal = step.terminal;
    buffer.push(transition, Origin::online, episode_id);
    episode_return_accum += step.reward;

    for (int g = 0; g < cfg.updates_per_step; ++g) {
      const auto indices = buffer.sample_indices(cfg.agent.batch_size);
      const Batch<float> batch = gather_batch<float>(buffer, indices);
      const double loss = agent.critic_update(batch, noise_rng, subset_rng);
      check_finite(loss, "critic loss", "online", t);
      loss_accum += loss;
      ++loss_count;
      ++result.critic_updates;
      if (result.critic_updates % cfg.agent.policy_delay == 0) {
        const auto terms = agent.actor_update(batch, alpha);
        check_finite(terms.objective(), "actor objective", "online", t);
        agent.polyak_targets();
        ++result.actor_updates;
        ++result.target_updates;
      }
    }

    if (step.terminal || step.truncated) {
      const double episode_norm = normalize_return(episode_return_accum, dataset.refs);
      ++result.episodes_completed;
      if (cfg.alpha_adaptive) {
        alpha = controller.adapt(episode_norm);
        ++result.alpha_adaptations;
      }
      CurveRow row;
      row.phase = "online";
      row.step = t;
      row.episode_return = episode_return_accum;
      row.episode_return_norm = episode_norm;
      row.alpha = alpha;
      row.r_avg = controller.has_observation() ? controller.r_avg() : kNaN;
      result.curve.push_back(row);
      episode_return_accum = 0.0;
      ++episode_id;
      obs = env.reset();
    } else {
      obs = step.obs;
    }
    if (t % cfg.eval_interval == 0) result.final_eval_norm = eval_row(t);
  }
  result.final_alpha = alpha;
  return result;
}

const char* kCurveHeader =
    "phase,step,episode_return,episode_return_norm,alpha_online,r_avg,eval_mean,eval_std,"
    "eval_mean_norm,td_loss";

namespace {
std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}
}  // namespace

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::runtime_error("write_curve_csv: cannot open '" + path + "'");
  out << kCurveHeader << '\n';
  for (const CurveRow& row : rows) {
    out << row.phase << ',' << row.step << ',' << format_cell(row.episode_return) << ','
        << format_cell(row.episode_return_norm) << ',' << format_cell(row.alpha) << ','
        << format_cell(row.r_avg) << ',' << format_cell(row.eval_mean) << ','
        << format_cell(row.eval_std) << ',' << format_cell(row.eval_mean_norm) << ','
        << format_cell(row.td_loss) << '\n';
  }
  if (!out) throw std::runtime_error("write_curve_csv: write to '" + path + "' failed");
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_timing_csv: cannot open '" + path + "'");
  out << "phase,step,wall_clock_s\n";
  for (const TimingRow& row : rows)
    out << row.phase << ',' << row.step << ',' << format_cell(row.seconds) << '\n';
  if (!out) throw std::runtime_error("write_timing_csv: write to '" + path + "' failed");
}

}  // namespace o2orl
