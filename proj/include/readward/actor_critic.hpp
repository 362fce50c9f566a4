#pragma once

// Two-layer tanh actor and critic with analytic gradients, templated on the
// scalar type so gradient checks can run at higher precision than training.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "readward/errors.hpp"

namespace readward::agents {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Mlp {
  Matrix<Scalar> w1;  // hidden x input
  Vector<Scalar> b1;
  Matrix<Scalar> w2;  // output x hidden
  Vector<Scalar> b2;

  static Mlp zeros(Eigen::Index input, Eigen::Index hidden, Eigen::Index output) {
    return {Matrix<Scalar>::Zero(hidden, input), Vector<Scalar>::Zero(hidden), Matrix<Scalar>::Zero(output, hidden),
            Vector<Scalar>::Zero(output)};
  }
  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index output_dim() const { return w2.rows(); }
};

/// Actor maps observations to action logits, critic to a scalar value.
template <typename Scalar>
struct PolicyParams {
  Mlp<Scalar> actor;
  Mlp<Scalar> critic;

  static PolicyParams zeros(Eigen::Index obs_dim, Eigen::Index hidden, Eigen::Index actions) {
    return {Mlp<Scalar>::zeros(obs_dim, hidden, actions), Mlp<Scalar>::zeros(obs_dim, hidden, 1)};
  }
  Eigen::Index size() const { return actor.size() + critic.size(); }

  template <typename Other>
  PolicyParams<Other> cast() const {
    auto c = [](const Mlp<Scalar>& m) {
      return Mlp<Other>{m.w1.template cast<Other>(), m.b1.template cast<Other>(), m.w2.template cast<Other>(),
                        m.b2.template cast<Other>()};
    };
    return {c(actor), c(critic)};
  }
};

namespace detail {

template <typename Scalar, typename Fn>
void for_each_block(PolicyParams<Scalar>& p, Fn&& fn) {
  for (auto* m : {&p.actor, &p.critic}) {
    fn(m->w1.data(), m->w1.size());
    fn(m->b1.data(), m->b1.size());
    fn(m->w2.data(), m->w2.size());
    fn(m->b2.data(), m->b2.size());
  }
}

}  // namespace detail

template <typename Scalar>
Vector<Scalar> flatten(const PolicyParams<Scalar>& p) {
  Vector<Scalar> out(p.size());
  Eigen::Index at = 0;
  detail::for_each_block(const_cast<PolicyParams<Scalar>&>(p), [&](Scalar* data, Eigen::Index n) {
    out.segment(at, n) = Eigen::Map<const Vector<Scalar>>(data, n);
    at += n;
  });
  return out;
}

template <typename Scalar>
void unflatten(PolicyParams<Scalar>& p, const Vector<Scalar>& flat) {
  if (flat.size() != p.size()) throw PreconditionError("unflatten: size mismatch");
  Eigen::Index at = 0;
  detail::for_each_block(p, [&](Scalar* data, Eigen::Index n) {
    Eigen::Map<Vector<Scalar>>(data, n) = flat.segment(at, n);
    at += n;
  });
}

/// Xavier-uniform weights, zero biases; the actor's output layer is scaled down
/// so the initial policy is close to uniform.
template <typename Scalar>
PolicyParams<Scalar> init_policy(Eigen::Index obs_dim, Eigen::Index hidden, Eigen::Index actions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](Matrix<Scalar>& w, double gain) {
    const double limit = gain * std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(u(rng));
  };
  auto p = PolicyParams<Scalar>::zeros(obs_dim, hidden, actions);
  fill(p.actor.w1, 1.0);
  fill(p.actor.w2, 0.01);
  fill(p.critic.w1, 1.0);
  fill(p.critic.w2, 1.0);
  return p;
}

/// Column-per-sample forward pass.
template <typename Scalar>
struct MlpOutput {
  Matrix<Scalar> hidden;  // tanh activations
  Matrix<Scalar> out;
};

template <typename Scalar>
MlpOutput<Scalar> forward(const Mlp<Scalar>& m, const Matrix<Scalar>& x) {
  MlpOutput<Scalar> o;
  o.hidden = ((m.w1 * x).colwise() + m.b1).array().tanh().matrix();
  o.out = (m.w2 * o.hidden).colwise() + m.b2;
  return o;
}

/// Column-wise softmax, shifted by the column max.
template <typename Scalar>
Matrix<Scalar> softmax(const Matrix<Scalar>& logits) {
  Matrix<Scalar> p = logits.rowwise() - logits.colwise().maxCoeff();
  p = p.array().exp().matrix();
  p.array().rowwise() /= p.colwise().sum().array();
  return p;
}

template <typename Scalar>
Matrix<Scalar> log_softmax(const Matrix<Scalar>& logits) {
  Matrix<Scalar> shifted = logits.rowwise() - logits.colwise().maxCoeff();
  const auto lse = shifted.array().exp().colwise().sum().log().matrix();
  return shifted.rowwise() - lse;
}

struct LossCoefficients {
  double value = 0.5;
  double entropy = 0.01;
};

/// Samples as columns; advantages and returns are constants of the loss.
template <typename Scalar>
struct Batch {
  Matrix<Scalar> obs;
  std::vector<int> actions;
  Vector<Scalar> advantages;
  Vector<Scalar> returns;

  Eigen::Index size() const { return obs.cols(); }
};

/// loss = -sum A log pi(a|s) + c_v sum (R - V(s))^2 - c_e sum H(pi(.|s))
template <typename Scalar>
Scalar a2c_loss(const PolicyParams<Scalar>& p, const Batch<Scalar>& b, const LossCoefficients& c) {
  const auto actor = forward(p.actor, b.obs);
  const auto critic = forward(p.critic, b.obs);
  const Matrix<Scalar> logp = log_softmax(actor.out);
  const Matrix<Scalar> prob = logp.array().exp().matrix();
  Scalar loss(0);
  for (Eigen::Index t = 0; t < b.size(); ++t) {
    const Scalar entropy = -(prob.col(t).array() * logp.col(t).array()).sum();
    const Scalar err = b.returns(t) - critic.out(0, t);
    loss += -b.advantages(t) * logp(b.actions[static_cast<size_t>(t)], t) + Scalar(c.value) * err * err -
            Scalar(c.entropy) * entropy;
  }
  return loss;
}

template <typename Scalar>
void backprop(const Mlp<Scalar>& m, const Matrix<Scalar>& x, const MlpOutput<Scalar>& o, const Matrix<Scalar>& d_out,
              Mlp<Scalar>& grad) {
  grad.w2 = d_out * o.hidden.transpose();
  grad.b2 = d_out.rowwise().sum();
  const Matrix<Scalar> d_pre = ((m.w2.transpose() * d_out).array() * (Scalar(1) - o.hidden.array().square())).matrix();
  grad.w1 = d_pre * x.transpose();
  grad.b1 = d_pre.rowwise().sum();
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss;
  PolicyParams<Scalar> grad;
};

template <typename Scalar>
LossAndGradient<Scalar> a2c_loss_and_gradient(const PolicyParams<Scalar>& p, const Batch<Scalar>& b,
                                              const LossCoefficients& c) {
  const auto actor = forward(p.actor, b.obs);
  const auto critic = forward(p.critic, b.obs);
  const Matrix<Scalar> logp = log_softmax(actor.out);
  const Matrix<Scalar> prob = logp.array().exp().matrix();

  Matrix<Scalar> d_logits(actor.out.rows(), b.size());
  Matrix<Scalar> d_value(1, b.size());
  Scalar loss(0);
  for (Eigen::Index t = 0; t < b.size(); ++t) {
    const auto a = b.actions[static_cast<size_t>(t)];
    const Scalar entropy = -(prob.col(t).array() * logp.col(t).array()).sum();
    const Scalar err = b.returns(t) - critic.out(0, t);
    loss += -b.advantages(t) * logp(a, t) + Scalar(c.value) * err * err - Scalar(c.entropy) * entropy;

    // d(-A log pi_a)/dz = A (pi - e_a);  d(-c_e H)/dz_j = c_e pi_j (log pi_j + H)
    d_logits.col(t) = b.advantages(t) * prob.col(t);
    d_logits(a, t) -= b.advantages(t);
    d_logits.col(t).array() += Scalar(c.entropy) * prob.col(t).array() * (logp.col(t).array() + entropy);
    d_value(0, t) = Scalar(-2.0 * c.value) * err;
  }

  LossAndGradient<Scalar> out{loss, p};
  backprop(p.actor, b.obs, actor, d_logits, out.grad.actor);
  backprop(p.critic, b.obs, critic, d_value, out.grad.critic);
  return out;
}

/// One rollout segment. values[t] = V(s_t); dones[t] marks s_{t+1} terminal.
struct Trajectory {
  Matrix<double> obs;  // obs_dim x T
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<bool> dones;
  /// V(s_T), ignored when the last step is terminal.
  double bootstrap_value = 0.0;

  size_t size() const { return actions.size(); }
  void validate() const;
};

/// n-step discounted returns R_t = r_t + gamma R_{t+1}, cut at terminal steps and
/// seeded with the bootstrap value.
Vector<double> n_step_returns(const Trajectory& traj, double gamma);
/// A_t = R_t - V(s_t).
Vector<double> advantage(const Trajectory& traj, double gamma);

Batch<double> make_batch(std::span<const Trajectory> trajectories, double gamma);

struct A2COptions {
  double lr = 7e-4;
  double gamma = 0.99;
  LossCoefficients coef;
  /// Global gradient-norm clip; 0 disables.
  double max_grad_norm = 0.0;
};

/// One plain gradient-descent step on the batch loss. Throws DivergenceError on
/// a non-finite loss or gradient.
PolicyParams<double> a2c_step(const PolicyParams<double>& params, std::span<const Trajectory> batch,
                              const A2COptions& options);

/// RMSprop state for the training loop.
struct RmsProp {
  double decay = 0.99;
  double eps = 1e-5;
  Vector<double> mean_square;

  void apply(PolicyParams<double>& params, const PolicyParams<double>& grad, double lr);
};

void check_finite(double loss, const Vector<double>& grad, const std::string& where);

}  // namespace readward::agents
