#include "readward/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "readward/errors.hpp"

namespace readward::agents {

ObsEncoder::ObsEncoder(int width, int height, std::vector<std::string> classes)
    : width_(width), height_(height), classes_(std::move(classes)), initial_counts_(classes_.size(), 1.0) {
  if (width_ < 2 || height_ < 2) throw PreconditionError("observation grid too small");
}

ObsEncoder::ObsEncoder(const env::Env& env)
    : ObsEncoder(env.config().width, env.config().height, env.object_classes()) {}

void ObsEncoder::reset(const env::StepResult& first) {
  std::fill(initial_counts_.begin(), initial_counts_.end(), 0.0);
  for (const auto& o : first.objects) {
    if (o.is_agent) continue;
    auto it = std::find(classes_.begin(), classes_.end(), o.class_name);
    if (it != classes_.end()) initial_counts_[static_cast<size_t>(it - classes_.begin())] += 1.0;
  }
  for (auto& c : initial_counts_) c = std::max(c, 1.0);
}

Eigen::VectorXd ObsEncoder::encode(const env::StepResult& frame) const {
  const auto& agent = frame.agent();
  const double sx = 1.0 / (width_ - 1);
  const double sy = 1.0 / (height_ - 1);
  const double ax = agent.box.center_x();
  const double ay = agent.box.center_y();

  Eigen::VectorXd obs = Eigen::VectorXd::Zero(dim());
  obs(0) = 2.0 * ax * sx - 1.0;
  obs(1) = 2.0 * ay * sy - 1.0;

  const auto n = classes_.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> counts(n, 0.0);
  for (const auto& o : frame.objects) {
    if (o.is_agent) continue;
    auto it = std::find(classes_.begin(), classes_.end(), o.class_name);
    if (it == classes_.end()) continue;
    const auto c = static_cast<size_t>(it - classes_.begin());
    const double dx = o.box.center_x() - ax;
    const double dy = o.box.center_y() - ay;
    const double d = std::abs(dx) + std::abs(dy);
    counts[c] += 1.0;
    if (d < best[c]) {
      best[c] = d;
      const auto base = static_cast<Eigen::Index>(2 + 3 * c);
      obs(base) = std::clamp(dx * sx, -1.0, 1.0);
      obs(base + 1) = std::clamp(dy * sy, -1.0, 1.0);
    }
  }
  for (size_t c = 0; c < n; ++c) {
    obs(static_cast<Eigen::Index>(4 + 3 * c)) = std::min(1.0, counts[c] / initial_counts_[c]);
  }
  return obs;
}

int ObsEncoder::bin(double offset, bool present) {
  if (!present) return 7;
  if (offset == 0.0) return 3;
  const double m = std::abs(offset);
  const int mag = m <= 1.0 / 32 ? 0 : (m <= 1.0 / 8 ? 1 : 2);
  return offset > 0 ? 4 + mag : 2 - mag;
}

long ObsEncoder::state_key(const Eigen::VectorXd& obs) const {
  if (obs.size() != dim()) throw PreconditionError("observation has wrong dimension");
  long key = 0;
  for (int d = 0; d < kKeyDims; ++d) {
    const auto c = static_cast<size_t>(d / 2);
    int b = 7;
    if (c < classes_.size()) {
      const auto base = static_cast<Eigen::Index>(2 + 3 * c);
      b = bin(obs(base + d % 2), obs(base + 2) > 0.0);
    }
    key = key * kBins + b;
  }
  return key;
}

void q_update(Eigen::Ref<Eigen::MatrixXd> q, long s, int a, double r, long s_next, double alpha, double gamma,
              bool terminal) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw PreconditionError("gamma must be in [0, 1)");
  if (s < 0 || s >= q.rows() || s_next < 0 || s_next >= q.rows() || a < 0 || a >= q.cols()) {
    throw PreconditionError("q_update: index out of range");
  }
  const double target = r + (terminal ? 0.0 : gamma * q.row(s_next).maxCoeff());
  q(s, a) += alpha * (target - q(s, a));
}

QLearner::QLearner(long num_states, int num_actions, QOptions options, std::uint64_t seed)
    : q_(Eigen::MatrixXd::Zero(num_states, num_actions)), options_(options), rng_(seed) {}

double QLearner::epsilon(long step, long total_steps) const {
  const double span = options_.epsilon_decay * static_cast<double>(total_steps);
  if (span <= 0.0) return options_.epsilon_end;
  const double f = std::min(1.0, static_cast<double>(step) / span);
  return options_.epsilon_start + f * (options_.epsilon_end - options_.epsilon_start);
}

int QLearner::act(long state, double epsilon) {
  const auto n = static_cast<int>(q_.cols());
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < epsilon) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng_);
  }
  const double best = q_.row(state).maxCoeff();
  std::vector<int> ties;
  for (int a = 0; a < n; ++a) {
    if (q_(state, a) == best) ties.push_back(a);
  }
  if (ties.size() == 1) return ties.front();
  return ties[std::uniform_int_distribution<size_t>(0, ties.size() - 1)(rng_)];
}

void QLearner::learn(long s, int a, double r, long s_next, bool terminal) {
  q_update(q_, s, a, r, s_next, options_.alpha, options_.gamma, terminal);
}

A2CLearner::A2CLearner(int obs_dim, int num_actions, A2CConfig config, std::uint64_t seed)
    : params_(init_policy<double>(obs_dim, config.hidden, num_actions, seed)),
      config_(config),
      rms_{config.rms_decay, config.rms_eps, {}},
      rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  if (config_.n_steps <= 0) throw ConfigError("a2c n_steps must be positive");
  if (config_.hidden <= 0) throw ConfigError("a2c hidden width must be positive");
}

A2CLearner::Decision A2CLearner::act(const Eigen::VectorXd& obs) {
  const Matrix<double> x = obs;
  const auto out = forward(params_.actor, x);
  const Matrix<double> logp = log_softmax(out.out);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  int action = static_cast<int>(logp.rows()) - 1;
  for (Eigen::Index a = 0; a < logp.rows(); ++a) {
    u -= std::exp(logp(a, 0));
    if (u < 0.0) {
      action = static_cast<int>(a);
      break;
    }
  }
  return {action, value(obs), logp(action, 0)};
}

double A2CLearner::value(const Eigen::VectorXd& obs) const {
  const Matrix<double> x = obs;
  return forward(params_.critic, x).out(0, 0);
}

void A2CLearner::learn(const Trajectory& traj) {
  const auto b = make_batch(std::span(&traj, 1), config_.optimizer.gamma);
  auto lg = a2c_loss_and_gradient(params_, b, config_.optimizer.coef);
  Vector<double> g = flatten(lg.grad);
  check_finite(lg.loss, g, "a2c update");
  const double max_norm = config_.optimizer.max_grad_norm;
  if (max_norm > 0.0 && g.norm() > max_norm) {
    g *= max_norm / g.norm();
    unflatten(lg.grad, g);
  }
  rms_.apply(params_, lg.grad, config_.optimizer.lr);
  if (!flatten(params_).allFinite()) throw DivergenceError("a2c update produced non-finite parameters");
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::q: return "q";
    case AgentKind::a2c: return "a2c";
    case AgentKind::random: return "random";
  }
  return "?";
}

AgentKind parse_agent(const std::string& name) {
  if (name == "q") return AgentKind::q;
  if (name == "a2c") return AgentKind::a2c;
  if (name == "random") return AgentKind::random;
  throw ConfigError("unknown agent '" + name + "' (expected q, a2c or random)");
}

}  // namespace readward::agents
