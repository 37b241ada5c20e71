#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "o2orl/env.hpp"
#include "o2orl/nn.hpp"
#include "o2orl/replay.hpp"
#include "o2orl/rng.hpp"

namespace o2orl {

enum class EnsembleMode { redq_random_pair, full_min, twin };

EnsembleMode ensemble_mode_from_string(const std::string& name);
std::string to_string(EnsembleMode mode);

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  int n_critics = 10;   // N
  int m_targets = 2;    // M, critics entering the target min
  int batch_size = 256;
  int policy_delay = 2;
  // noise scales are relative to the half action range per dimension
  double sigma_expl = 0.1;
  double sigma_policy = 0.2;
  double noise_clip = 0.5;
  EnsembleMode ensemble_mode = EnsembleMode::redq_random_pair;
  bool per_sample_subsets = false;
  double q_norm_epsilon = 1e-6;
  bool q_norm_abs = true;  // |Q| in the normalizer denominator
  int hidden_dim = 256;
  AdamParams adam;
  int threads = 0;  // 0 = one per hardware thread, capped at n_critics

  void validate() const;
  int resolved_threads() const;
};

template <class S>
struct Batch {
  MatX<S> obs, act, next_obs;
  MatX<S> obs_act;  // [obs | act], the critic input
  VecX<S> reward, not_terminal;

  Eigen::Index size() const { return obs.rows(); }
};

template <class S>
Batch<S> gather_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices) {
  Batch<S> batch;
  const auto b = static_cast<Eigen::Index>(indices.size());
  if (b == 0) throw std::invalid_argument("gather_batch: empty index set");
  const auto& first = buffer[indices[0]].transition;
  const Eigen::Index obs_dim = first.obs.size();
  const Eigen::Index act_dim = first.action.size();
  batch.obs.resize(b, obs_dim);
  batch.act.resize(b, act_dim);
  batch.next_obs.resize(b, obs_dim);
  batch.obs_act.resize(b, obs_dim + act_dim);
  batch.reward.resize(b);
  batch.not_terminal.resize(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& entry = buffer[indices[static_cast<std::size_t>(i)]];
    batch.obs.row(i) = entry.transition.obs.template cast<S>().transpose();
    batch.act.row(i) = entry.transition.action.template cast<S>().transpose();
    batch.next_obs.row(i) = entry.transition.next_obs.template cast<S>().transpose();
    batch.reward(i) = static_cast<S>(entry.transition.reward);
    batch.not_terminal(i) = entry.transition.terminal ? S(0) : S(1);
  }
  batch.obs_act.leftCols(obs_dim) = batch.obs;
  batch.obs_act.rightCols(act_dim) = batch.act;
  return batch;
}

// Deterministic actor output plus clipped Gaussian exploration noise;
// sigma is the per-dimension standard deviation (zero for evaluation).
template <class S>
VectorXd select_action(const DenseNet<S>& actor, const VectorXd& obs, const VectorXd& sigma, Rng& rng,
                       const VectorXd& low, const VectorXd& high) {
  VecX<S> out = actor.forward_one(obs.cast<S>());
  VectorXd action = out.template cast<double>();
  for (Eigen::Index d = 0; d < action.size(); ++d) {
    if (sigma(d) > 0.0) action(d) += rng.normal(0.0, sigma(d));
    action(d) = std::clamp(action(d), low(d), high(d));
  }
  return action;
}

// Batch Q values divided by the detached minibatch mean magnitude
// (plus epsilon); no gradient flows through the denominator.
template <class S>
VecX<S> qbar_normalize(const VecX<S>& q, double epsilon, bool use_abs = true) {
  if (q.size() == 0) throw std::invalid_argument("qbar_normalize: empty batch");
  const double denom =
      (use_abs ? q.template cast<double>().cwiseAbs().mean() : q.template cast<double>().mean()) + epsilon;
  return q / static_cast<S>(denom);
}

// Elementwise target <- tau * online + (1 - tau) * target.
template <class S>
void polyak_update(const DenseNet<S>& online, DenseNet<S>& target, double tau) {
  if (!online.same_shape(target)) throw std::invalid_argument("polyak_update: shape mismatch");
  const S t = static_cast<S>(tau);
  for (int l = 0; l < 3; ++l) {
    target.weights(l) = t * online.weights(l) + (S(1) - t) * target.weights(l);
    target.bias(l) = t * online.bias(l) + (S(1) - t) * target.bias(l);
  }
}

// TD3-style agent with an ensemble of N critics trained against a shared
// randomized-subset min target, and a policy trained on the normalized
// ensemble-average Q minus a weighted behavior cloning penalty.
template <class S>
class Agent {
 public:
  Agent(AgentConfig config, EnvSpec env, std::uint64_t init_seed)
      : config_(config), env_(std::move(env)), init_seed_(init_seed) {
    config_.validate();
    half_range_ = (env_.action_high - env_.action_low) / 2.0;
    actor_ = DenseNet<S>(env_.obs_dim, config_.hidden_dim, config_.hidden_dim, env_.act_dim,
                         OutputActivation::scaled_tanh, env_.action_low, env_.action_high,
                         derive_seed(init_seed, "actor"));
    const int critic_in = env_.obs_dim + env_.act_dim;
    critics_.reserve(static_cast<std::size_t>(config_.n_critics));
    for (int i = 0; i < config_.n_critics; ++i)
      critics_.emplace_back(critic_in, config_.hidden_dim, config_.hidden_dim, 1,
                            OutputActivation::linear, VectorXd(), VectorXd(),
                            derive_seed(derive_seed(init_seed, "critic"), static_cast<std::uint64_t>(i)));
    target_actor_ = actor_;
    target_critics_ = critics_;
    actor_opt_ = AdamState<S>::zeros_like(actor_);
    critic_opt_.reserve(critics_.size());
    for (const auto& c : critics_) critic_opt_.push_back(AdamState<S>::zeros_like(c));
    work_.resize(critics_.size());
  }

  const AgentConfig& config() const { return config_; }
  const EnvSpec& env() const { return env_; }
  std::uint64_t init_seed() const { return init_seed_; }
  const DenseNet<S>& actor() const { return actor_; }
  DenseNet<S>& actor() { return actor_; }
  const DenseNet<S>& target_actor() const { return target_actor_; }
  const std::vector<DenseNet<S>>& critics() const { return critics_; }
  std::vector<DenseNet<S>>& critics() { return critics_; }
  const std::vector<DenseNet<S>>& target_critics() const { return target_critics_; }
  std::vector<DenseNet<S>>& target_critics() { return target_critics_; }

  VectorXd exploration_sigma() const { return config_.sigma_expl * half_range_; }

  // Shared per-transition critic targets (Bellman backup through the target
  // actor with clipped smoothing noise and a subset-min over target critics).
  // One noise draw and one subset draw per call, shared across the batch,
  // unless per-sample subsets are enabled.
  VecX<S> compute_critic_target(const Batch<S>& batch, Rng& noise_rng, Rng& subset_rng) const {
    if (config_.per_sample_subsets) return target_for_subsets(batch, noise_rng, nullptr, &subset_rng);
    const std::vector<int> subset = draw_subset(subset_rng);
    return target_for_subsets(batch, noise_rng, &subset, nullptr);
  }

  // Test hook: same computation with a caller-chosen critic subset.
  VecX<S> compute_critic_target_with_subset(const Batch<S>& batch, Rng& noise_rng,
                                            std::span<const int> subset) const {
    std::vector<int> s(subset.begin(), subset.end());
    validate_subset(s);
    return target_for_subsets(batch, noise_rng, &s, nullptr);
  }

  // One Adam step of every critic toward the shared targets; returns the
  // mean squared residual over critics and transitions.
  double critic_update(const Batch<S>& batch, Rng& noise_rng, Rng& subset_rng) {
    const VecX<S> target = compute_critic_target(batch, noise_rng, subset_rng);
    const auto b = batch.size();
    const int n = config_.n_critics;
    const S loss_scale = S(2) / static_cast<S>(b);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(config_.resolved_threads())
#endif
    for (int i = 0; i < n; ++i) {
      Workspace& ws = work_[static_cast<std::size_t>(i)];
      const MatX<S>& q = critics_[static_cast<std::size_t>(i)].forward(batch.obs_act, ws.cache);
      ws.residual = q.col(0) - target;
      ws.out_grad = ws.residual * loss_scale;
      ensure_grads(ws.grads, critics_[static_cast<std::size_t>(i)]);
      critics_[static_cast<std::size_t>(i)].backward(ws.cache, ws.out_grad, &ws.grads, nullptr);
      adam_step(critics_[static_cast<std::size_t>(i)], ws.grads, critic_opt_[static_cast<std::size_t>(i)],
                config_.adam);
      ws.loss = static_cast<double>(ws.residual.squaredNorm()) / static_cast<double>(b);
    }
    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += work_[static_cast<std::size_t>(i)].loss;  // fixed order
    return loss / static_cast<double>(n);
  }

  struct ActorLossTerms {
    double q_term = 0.0;   // mean over batch and critics of the normalized Q
    double bc_term = 0.0;  // alpha-weighted mean squared action distance
    double objective() const { return q_term - bc_term; }
  };

  // One Adam ascent step on mean_B [ mean_i Qbar_i(s, pi(s)) - alpha * |pi(s) - a|^2 ].
  // Critic parameters stay frozen; their action gradients flow into the actor.
  ActorLossTerms actor_update(const Batch<S>& batch, double alpha) {
    const auto b = batch.size();
    const int n = config_.n_critics;
    ForwardCache<S> actor_cache;
    const MatX<S>& pi = actor_.forward(batch.obs, actor_cache);
    MatX<S> obs_pi(b, env_.obs_dim + env_.act_dim);
    obs_pi.leftCols(env_.obs_dim) = batch.obs;
    obs_pi.rightCols(env_.act_dim) = pi;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(config_.resolved_threads())
#endif
    for (int i = 0; i < n; ++i) {
      Workspace& ws = work_[static_cast<std::size_t>(i)];
      const MatX<S>& q = critics_[static_cast<std::size_t>(i)].forward(obs_pi, ws.cache);
      const double denom = q_denominator(q.col(0));
      ws.loss = static_cast<double>(q.col(0).sum()) / (static_cast<double>(b) * denom);
      const S g = S(-1) / (static_cast<S>(b) * static_cast<S>(n) * static_cast<S>(denom));
      ws.out_grad = MatX<S>::Constant(b, 1, g);
      critics_[static_cast<std::size_t>(i)].backward(ws.cache, ws.out_grad, nullptr, &ws.input_grad);
    }
    ActorLossTerms terms;
    MatX<S> dpi = MatX<S>::Zero(b, env_.act_dim);
    for (int i = 0; i < n; ++i) {  // fixed order
      dpi += work_[static_cast<std::size_t>(i)].input_grad.rightCols(env_.act_dim);
      terms.q_term += work_[static_cast<std::size_t>(i)].loss;
    }
    terms.q_term /= static_cast<double>(n);
    const MatX<S> bc_residual = pi - batch.act;
    terms.bc_term = alpha * static_cast<double>(bc_residual.squaredNorm()) / static_cast<double>(b);
    dpi += (S(2) * static_cast<S>(alpha) / static_cast<S>(b)) * bc_residual;
    ensure_grads(actor_grads_, actor_);
    actor_.backward(actor_cache, dpi, &actor_grads_, nullptr);
    adam_step(actor_, actor_grads_, actor_opt_, config_.adam);
    return terms;
  }

  // Objective value with fixed normalizer denominators, for gradient checks.
  double actor_objective(const Batch<S>& batch, double alpha, std::span<const double> frozen_denoms) const {
    const auto b = batch.size();
    if (static_cast<int>(frozen_denoms.size()) != config_.n_critics)
      throw std::invalid_argument("actor_objective: one denominator per critic expected");
    const MatX<S> pi = actor_.forward(batch.obs);
    MatX<S> obs_pi(b, env_.obs_dim + env_.act_dim);
    obs_pi.leftCols(env_.obs_dim) = batch.obs;
    obs_pi.rightCols(env_.act_dim) = pi;
    double q_term = 0.0;
    for (int i = 0; i < config_.n_critics; ++i) {
      const MatX<S> q = critics_[static_cast<std::size_t>(i)].forward(obs_pi);
      q_term += static_cast<double>(q.col(0).sum()) / (static_cast<double>(b) * frozen_denoms[static_cast<std::size_t>(i)]);
    }
    q_term /= static_cast<double>(config_.n_critics);
    const double bc = alpha * static_cast<double>((pi - batch.act).squaredNorm()) / static_cast<double>(b);
    return q_term - bc;
  }

  // Detached normalizer denominators at the current actor parameters.
  std::vector<double> q_denominators(const Batch<S>& batch) const {
    const auto b = batch.size();
    const MatX<S> pi = actor_.forward(batch.obs);
    MatX<S> obs_pi(b, env_.obs_dim + env_.act_dim);
    obs_pi.leftCols(env_.obs_dim) = batch.obs;
    obs_pi.rightCols(env_.act_dim) = pi;
    std::vector<double> denoms;
    denoms.reserve(static_cast<std::size_t>(config_.n_critics));
    for (int i = 0; i < config_.n_critics; ++i)
      denoms.push_back(q_denominator(critics_[static_cast<std::size_t>(i)].forward(obs_pi).col(0)));
    return denoms;
  }

  void polyak_targets() {
    polyak_update(actor_, target_actor_, config_.tau);
    for (int i = 0; i < config_.n_critics; ++i)
      polyak_update(critics_[static_cast<std::size_t>(i)], target_critics_[static_cast<std::size_t>(i)],
                    config_.tau);
  }

  void set_targets(DenseNet<S> target_actor, std::vector<DenseNet<S>> target_critics) {
    if (!target_actor.same_shape(actor_) || target_critics.size() != critics_.size())
      throw std::invalid_argument("set_targets: architecture mismatch");
    for (std::size_t i = 0; i < target_critics.size(); ++i)
      if (!target_critics[i].same_shape(critics_[i]))
        throw std::invalid_argument("set_targets: critic architecture mismatch");
    target_actor_ = std::move(target_actor);
    target_critics_ = std::move(target_critics);
  }

 private:
  struct Workspace {
    ForwardCache<S> cache;
    NetGrads<S> grads;
    MatX<S> out_grad;
    MatX<S> input_grad;
    VecX<S> residual;
    double loss = 0.0;
  };

  static void ensure_grads(NetGrads<S>& grads, const DenseNet<S>& net) {
    for (int l = 0; l < 3; ++l) {
      grads.w[l].resize(net.weights(l).rows(), net.weights(l).cols());
      grads.b[l].resize(net.bias(l).size());
    }
  }

  double q_denominator(const VecX<S>& q) const {
    const auto qd = q.template cast<double>();
    return (config_.q_norm_abs ? qd.cwiseAbs().mean() : qd.mean()) + config_.q_norm_epsilon;
  }

  void validate_subset(const std::vector<int>& subset) const {
    if (subset.empty()) throw std::invalid_argument("critic subset must be nonempty");
    for (int i : subset)
      if (i < 0 || i >= config_.n_critics) throw std::invalid_argument("critic subset index out of range");
  }

  std::vector<int> draw_subset(Rng& subset_rng) const {
    std::vector<int> all(static_cast<std::size_t>(config_.n_critics));
    std::iota(all.begin(), all.end(), 0);
    switch (config_.ensemble_mode) {
      case EnsembleMode::full_min:
        return all;
      case EnsembleMode::twin:
        return config_.n_critics >= 2 ? std::vector<int>{0, 1} : std::vector<int>{0};
      case EnsembleMode::redq_random_pair: {
        const int m = config_.m_targets;
        for (int i = 0; i < m; ++i) {
          const auto j = static_cast<std::size_t>(i) +
                         static_cast<std::size_t>(subset_rng.below(static_cast<std::uint64_t>(config_.n_critics - i)));
          std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(m));
        return all;
      }
    }
    throw std::logic_error("draw_subset: invalid ensemble mode");
  }

  // Smoothed next actions, then r + gamma * (1 - terminal) * min_i Q'_i(s', a').
  // Exactly one of fixed_subset / per_sample_rng is used.
  VecX<S> target_for_subsets(const Batch<S>& batch, Rng& noise_rng, const std::vector<int>* fixed_subset,
                             Rng* per_sample_rng) const {
    if (batch.size() == 0) throw std::invalid_argument("compute_critic_target: empty batch");
    const auto b = batch.size();
    MatX<S> next_action = target_actor_.forward(batch.next_obs);
    for (int d = 0; d < env_.act_dim; ++d) {
      const double sigma = config_.sigma_policy * half_range_(d);
      const double clip = config_.noise_clip * half_range_(d);
      const double eps = std::clamp(noise_rng.normal(0.0, sigma), -clip, clip);
      for (Eigen::Index r = 0; r < b; ++r) {
        next_action(r, d) = std::clamp(next_action(r, d) + static_cast<S>(eps),
                                       static_cast<S>(env_.action_low(d)), static_cast<S>(env_.action_high(d)));
      }
    }
    MatX<S> next_obs_act(b, env_.obs_dim + env_.act_dim);
    next_obs_act.leftCols(env_.obs_dim) = batch.next_obs;
    next_obs_act.rightCols(env_.act_dim) = next_action;

    VecX<S> min_q;
    if (fixed_subset) {
      for (std::size_t k = 0; k < fixed_subset->size(); ++k) {
        const auto& critic = target_critics_[static_cast<std::size_t>((*fixed_subset)[k])];
        const VecX<S> q = critic.forward(next_obs_act).col(0);
        min_q = k == 0 ? q : min_q.cwiseMin(q);
      }
    } else {
      MatX<S> all_q(b, config_.n_critics);
      for (int i = 0; i < config_.n_critics; ++i)
        all_q.col(i) = target_critics_[static_cast<std::size_t>(i)].forward(next_obs_act).col(0);
      min_q.resize(b);
      for (Eigen::Index r = 0; r < b; ++r) {
        const std::vector<int> subset = draw_subset(*per_sample_rng);
        S m = all_q(r, subset[0]);
        for (std::size_t k = 1; k < subset.size(); ++k) m = std::min(m, all_q(r, subset[k]));
        min_q(r) = m;
      }
    }
    return batch.reward +
           (static_cast<S>(config_.gamma) * batch.not_terminal.array() * min_q.array()).matrix();
  }

  AgentConfig config_;
  EnvSpec env_;
  VectorXd half_range_;
  std::uint64_t init_seed_ = 0;
  DenseNet<S> actor_, target_actor_;
  std::vector<DenseNet<S>> critics_, target_critics_;
  AdamState<S> actor_opt_;
  std::vector<AdamState<S>> critic_opt_;
  NetGrads<S> actor_grads_;
  mutable std::vector<Workspace> work_;
};

}  // namespace o2orl
