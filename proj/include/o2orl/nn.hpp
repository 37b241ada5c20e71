#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "o2orl/rng.hpp"

namespace o2orl {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::MatrixXf;
using Eigen::VectorXd;
using Eigen::VectorXf;

enum class OutputActivation { linear, scaled_tanh };

template <class S>
struct NetGrads {
  std::array<MatX<S>, 3> w;
  std::array<VecX<S>, 3> b;
};

// Per-layer activations kept by a forward pass; backward consumes them.
// Tagged with the owning net and its parameter version so a cache taken
// before a parameter update cannot be replayed afterwards.
template <class S>
struct ForwardCache {
  const void* net = nullptr;
  std::uint64_t version = 0;
  MatX<S> x;       // inputs, rows = samples
  MatX<S> h1, h2;  // post-rectifier hidden activations
  MatX<S> t;       // tanh(z3) for scaled_tanh heads
  MatX<S> y;       // outputs
};

// Two-hidden-layer fully connected network with rectifier hidden units and
// either a linear head or a tanh head rescaled into [out_low, out_high].
// Weight matrices are (fan_out x fan_in); batches are (rows = samples).
template <class S>
class DenseNet {
 public:
  DenseNet() = default;

  DenseNet(int in_dim, int h1, int h2, int out_dim, OutputActivation activation,
           VectorXd out_low, VectorXd out_high, std::uint64_t seed)
      : dims_{in_dim, h1, h2, out_dim}, activation_(activation), init_seed_(seed) {
    if (in_dim < 1 || h1 < 1 || h2 < 1 || out_dim < 1)
      throw std::invalid_argument("DenseNet: layer widths must be positive");
    if (activation == OutputActivation::scaled_tanh) {
      if (out_low.size() != out_dim || out_high.size() != out_dim)
        throw std::invalid_argument("DenseNet: output bounds must match output_dim");
      if (((out_high - out_low).array() <= 0.0).any())
        throw std::invalid_argument("DenseNet: out_low must be below out_high");
      out_center_ = ((out_low + out_high) / 2.0).cast<S>();
      out_half_range_ = ((out_high - out_low) / 2.0).cast<S>();
    }
    Rng rng(seed);
    for (int l = 0; l < 3; ++l) {
      const int fan_in = dims_[l];
      const int fan_out = dims_[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      w_[l].resize(fan_out, fan_in);
      b_[l].resize(fan_out);
      for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) w_[l](r, c) = static_cast<S>(rng.uniform(-bound, bound));
      for (int r = 0; r < fan_out; ++r) b_[l](r) = static_cast<S>(rng.uniform(-bound, bound));
    }
  }

  int input_dim() const { return dims_[0]; }
  int output_dim() const { return dims_[3]; }
  const std::array<int, 4>& dims() const { return dims_; }
  OutputActivation activation() const { return activation_; }
  std::uint64_t init_seed() const { return init_seed_; }
  std::uint64_t version() const { return version_; }

  const MatX<S>& weights(int layer) const { return w_[layer]; }
  const VecX<S>& bias(int layer) const { return b_[layer]; }
  // Mutable access counts as a parameter update for cache-staleness purposes.
  MatX<S>& weights(int layer) {
    ++version_;
    return w_[layer];
  }
  VecX<S>& bias(int layer) {
    ++version_;
    return b_[layer];
  }
  const VecX<S>& out_center() const { return out_center_; }
  const VecX<S>& out_half_range() const { return out_half_range_; }
  VectorXd out_low() const { return (out_center_ - out_half_range_).template cast<double>(); }
  VectorXd out_high() const { return (out_center_ + out_half_range_).template cast<double>(); }

  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (int l = 0; l < 3; ++l) n += w_[l].size() + b_[l].size();
    return n;
  }

  const MatX<S>& forward(const MatX<S>& x, ForwardCache<S>& cache) const {
    if (x.cols() != dims_[0])
      throw std::invalid_argument("DenseNet::forward: input width " + std::to_string(x.cols()) +
                                  " does not match input_dim " + std::to_string(dims_[0]));
    cache.net = this;
    cache.version = version_;
    cache.x = x;
    cache.h1.noalias() = x * w_[0].transpose();
    cache.h1.rowwise() += b_[0].transpose();
    cache.h1 = cache.h1.cwiseMax(S(0));
    cache.h2.noalias() = cache.h1 * w_[1].transpose();
    cache.h2.rowwise() += b_[1].transpose();
    cache.h2 = cache.h2.cwiseMax(S(0));
    cache.y.noalias() = cache.h2 * w_[2].transpose();
    cache.y.rowwise() += b_[2].transpose();
    if (activation_ == OutputActivation::scaled_tanh) {
      cache.t = cache.y.array().tanh().matrix();
      cache.y = ((cache.t.array().rowwise() * out_half_range_.transpose().array()).rowwise() +
                 out_center_.transpose().array())
                    .matrix();
    }
    return cache.y;
  }

  MatX<S> forward(const MatX<S>& x) const {
    ForwardCache<S> cache;
    forward(x, cache);
    return std::move(cache.y);
  }

  VecX<S> forward_one(const VecX<S>& x) const {
    MatX<S> row = x.transpose();
    return forward(row).row(0).transpose();
  }

  // Gradients of sum_ij out_grad(i,j) * y(i,j) with respect to parameters
  // (into *param_grads when non-null) and inputs (into *input_grads when
  // non-null). The cache must come from a forward pass on this net at the
  // current parameter version.
  void backward(const ForwardCache<S>& cache, const MatX<S>& out_grad, NetGrads<S>* param_grads,
                MatX<S>* input_grads) const {
    if (cache.net != this) throw std::invalid_argument("DenseNet::backward: cache from a different net");
    if (cache.version != version_)
      throw std::invalid_argument("DenseNet::backward: stale cache (parameters changed)");
    if (out_grad.rows() != cache.x.rows() || out_grad.cols() != dims_[3])
      throw std::invalid_argument("DenseNet::backward: output gradient shape mismatch");

    MatX<S> dz3;
    if (activation_ == OutputActivation::scaled_tanh) {
      dz3 = ((out_grad.array() * (S(1) - cache.t.array().square())).rowwise() *
             out_half_range_.transpose().array())
                .matrix();
    } else {
      dz3 = out_grad;
    }
    if (param_grads) {
      param_grads->w[2].noalias() = dz3.transpose() * cache.h2;
      param_grads->b[2] = dz3.colwise().sum().transpose();
    }
    MatX<S> dh2;
    dh2.noalias() = dz3 * w_[2];
    MatX<S> dz2 = ((cache.h2.array() > S(0)).template cast<S>() * dh2.array()).matrix();
    if (param_grads) {
      param_grads->w[1].noalias() = dz2.transpose() * cache.h1;
      param_grads->b[1] = dz2.colwise().sum().transpose();
    }
    MatX<S> dh1;
    dh1.noalias() = dz2 * w_[1];
    MatX<S> dz1 = ((cache.h1.array() > S(0)).template cast<S>() * dh1.array()).matrix();
    if (param_grads) {
      param_grads->w[0].noalias() = dz1.transpose() * cache.x;
      param_grads->b[0] = dz1.colwise().sum().transpose();
    }
    if (input_grads) input_grads->noalias() = dz1 * w_[0];
  }

  template <class S2>
  DenseNet<S2> cast() const {
    DenseNet<S2> other;
    other.dims_ = dims_;
    other.activation_ = activation_;
    other.init_seed_ = init_seed_;
    for (int l = 0; l < 3; ++l) {
      other.w_[l] = w_[l].template cast<S2>();
      other.b_[l] = b_[l].template cast<S2>();
    }
    other.out_center_ = out_center_.template cast<S2>();
    other.out_half_range_ = out_half_range_.template cast<S2>();
    return other;
  }

  bool same_shape(const DenseNet& other) const {
    return dims_ == other.dims_ && activation_ == other.activation_;
  }

  template <class S2>
  friend class DenseNet;

 private:
  std::array<int, 4> dims_{0, 0, 0, 0};
  OutputActivation activation_ = OutputActivation::linear;
  std::array<MatX<S>, 3> w_;
  std::array<VecX<S>, 3> b_;
  VecX<S> out_center_, out_half_range_;
  std::uint64_t init_seed_ = 0;
  std::uint64_t version_ = 0;
};

struct AdamParams {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class S>
struct AdamState {
  std::array<MatX<S>, 3> mw, vw;
  std::array<VecX<S>, 3> mb, vb;
  long t = 0;

  static AdamState zeros_like(const DenseNet<S>& net) {
    AdamState st;
    for (int l = 0; l < 3; ++l) {
      st.mw[l] = MatX<S>::Zero(net.weights(l).rows(), net.weights(l).cols());
      st.vw[l] = st.mw[l];
      st.mb[l] = VecX<S>::Zero(net.bias(l).size());
      st.vb[l] = st.mb[l];
    }
    return st;
  }
};

namespace detail {
template <class S, class P, class G>
void adam_apply(P&& p, const G& g, P&& m, P&& v, double lr_corrected, double bc2, const AdamParams& hp) {
  const S b1 = static_cast<S>(hp.beta1);
  const S b2 = static_cast<S>(hp.beta2);
  const S eps = static_cast<S>(hp.epsilon);
  m = b1 * m + (S(1) - b1) * g;
  v = (b2 * v.array() + (S(1) - b2) * g.array().square()).matrix();
  p.array() -= static_cast<S>(lr_corrected) * m.array() /
               ((v.array() / static_cast<S>(bc2)).sqrt() + eps);
}
}  // namespace detail

// One bias-corrected Adam update of every parameter; the step counter
// advances by exactly one.
template <class S>
void adam_step(DenseNet<S>& net, const NetGrads<S>& grads, AdamState<S>& state, const AdamParams& hp) {
  for (int l = 0; l < 3; ++l) {
    if (grads.w[l].rows() != net.weights(l).rows() || grads.w[l].cols() != net.weights(l).cols() ||
        grads.b[l].size() != net.bias(l).size())
      throw std::invalid_argument("adam_step: gradient shape mismatch at layer " + std::to_string(l));
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  const double lr_corrected = hp.lr / bc1;
  for (int l = 0; l < 3; ++l) {
    detail::adam_apply<S>(net.weights(l), grads.w[l], state.mw[l], state.vw[l], lr_corrected, bc2, hp);
    detail::adam_apply<S>(net.bias(l), grads.b[l], state.mb[l], state.vb[l], lr_corrected, bc2, hp);
  }
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  int worst_layer = -1;
  bool worst_is_bias = false;
  long worst_index = -1;
  long params_checked = 0;
};

// Compares the analytic parameter gradients produced by `loss_fn` against
// central finite differences of its value. loss_fn(net, grads_or_null) must
// return the scalar loss and, when the pointer is non-null, fill the exact
// gradients. The net itself is never mutated; perturbations act on copies.
// Relative error uses a symmetric denominator floored at 1.
template <class S, class LossFn>
GradCheckReport finite_diff_check(const DenseNet<S>& net, LossFn&& loss_fn, double tolerance,
                                  double step = 1e-5) {
  NetGrads<S> analytic;
  loss_fn(net, &analytic);
  GradCheckReport report;
  report.tolerance = tolerance;

  auto check_entry = [&](int layer, bool is_bias, long index, double analytic_g) {
    DenseNet<S> plus = net;
    DenseNet<S> minus = net;
    if (is_bias) {
      plus.bias(layer)(index) += static_cast<S>(step);
      minus.bias(layer)(index) -= static_cast<S>(step);
    } else {
      plus.weights(layer).data()[index] += static_cast<S>(step);
      minus.weights(layer).data()[index] -= static_cast<S>(step);
    }
    const double fd = (static_cast<double>(loss_fn(plus, nullptr)) -
                       static_cast<double>(loss_fn(minus, nullptr))) /
                      (2.0 * step);
    const double denom = std::max({1.0, std::abs(analytic_g), std::abs(fd)});
    const double rel = std::abs(analytic_g - fd) / denom;
    ++report.params_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_layer = layer;
      report.worst_is_bias = is_bias;
      report.worst_index = index;
    }
  };

  for (int l = 0; l < 3; ++l) {
    for (long i = 0; i < net.weights(l).size(); ++i)
      check_entry(l, false, i, static_cast<double>(analytic.w[l].data()[i]));
    for (long i = 0; i < net.bias(l).size(); ++i)
      check_entry(l, true, i, static_cast<double>(analytic.b[l](i)));
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace o2orl
