#include "readward/actor_critic.hpp"

#include <sstream>

namespace readward::agents {

void Trajectory::validate() const {
  const auto n = actions.size();
  if (n == 0) throw PreconditionError("empty trajectory");
  if (rewards.size() != n || values.size() != n || dones.size() != n || static_cast<size_t>(obs.cols()) != n ||
      (!log_probs.empty() && log_probs.size() != n)) {
    throw PreconditionError("trajectory fields have inconsistent lengths");
  }
}

Vector<double> n_step_returns(const Trajectory& traj, double gamma) {
  traj.validate();
  const auto n = static_cast<Eigen::Index>(traj.size());
  Vector<double> ret(n);
  double running = traj.bootstrap_value;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const auto i = static_cast<size_t>(t);
    if (traj.dones[i]) running = 0.0;
    running = traj.rewards[i] + gamma * running;
    ret(t) = running;
  }
  return ret;
}

Vector<double> advantage(const Trajectory& traj, double gamma) {
  Vector<double> adv = n_step_returns(traj, gamma);
  for (Eigen::Index t = 0; t < adv.size(); ++t) adv(t) -= traj.values[static_cast<size_t>(t)];
  return adv;
}

Batch<double> make_batch(std::span<const Trajectory> trajectories, double gamma) {
  if (trajectories.empty()) throw PreconditionError("a2c batch is empty");
  Eigen::Index total = 0;
  for (const auto& t : trajectories) {
    t.validate();
    total += static_cast<Eigen::Index>(t.size());
  }
  const auto dim = trajectories.front().obs.rows();
  Batch<double> b;
  b.obs.resize(dim, total);
  b.advantages.resize(total);
  b.returns.resize(total);
  b.actions.reserve(static_cast<size_t>(total));
  Eigen::Index at = 0;
  for (const auto& t : trajectories) {
    if (t.obs.rows() != dim) throw PreconditionError("trajectories disagree on observation size");
    const auto n = static_cast<Eigen::Index>(t.size());
    const auto ret = n_step_returns(t, gamma);
    b.obs.middleCols(at, n) = t.obs;
    b.returns.segment(at, n) = ret;
    for (Eigen::Index i = 0; i < n; ++i) b.advantages(at + i) = ret(i) - t.values[static_cast<size_t>(i)];
    b.actions.insert(b.actions.end(), t.actions.begin(), t.actions.end());
    at += n;
  }
  return b;
}

void check_finite(double loss, const Vector<double>& grad, const std::string& where) {
  if (std::isfinite(loss) && grad.allFinite()) return;
  std::ostringstream os;
  os << where << ": non-finite ";
  if (!std::isfinite(loss)) {
    os << "loss (" << loss << ")";
  } else {
    Eigen::Index bad = 0;
    for (; bad < grad.size() && std::isfinite(grad(bad)); ++bad) {}
    os << "gradient at parameter " << bad << " of " << grad.size();
  }
  throw DivergenceError(os.str());
}

namespace {

Vector<double> clipped_gradient(const PolicyParams<double>& grad, double max_norm) {
  Vector<double> g = flatten(grad);
  if (max_norm > 0.0) {
    const double norm = g.norm();
    if (norm > max_norm) g *= max_norm / norm;
  }
  return g;
}

}  // namespace

PolicyParams<double> a2c_step(const PolicyParams<double>& params, std::span<const Trajectory> batch,
                              const A2COptions& options) {
  const auto b = make_batch(batch, options.gamma);
  const auto lg = a2c_loss_and_gradient(params, b, options.coef);
  const Vector<double> g = clipped_gradient(lg.grad, options.max_grad_norm);
  check_finite(lg.loss, g, "a2c_step");
  PolicyParams<double> next = params;
  unflatten(next, Vector<double>(flatten(params) - options.lr * g));
  return next;
}

void RmsProp::apply(PolicyParams<double>& params, const PolicyParams<double>& grad, double lr) {
  const Vector<double> g = flatten(grad);
  if (mean_square.size() != g.size()) mean_square = Vector<double>::Zero(g.size());
  mean_square = decay * mean_square + (1.0 - decay) * g.cwiseProduct(g);
  const Vector<double> step = (g.array() / (mean_square.array().sqrt() + eps)).matrix();
  unflatten(params, Vector<double>(flatten(params) - lr * step));
}

}  // namespace readward::agents
