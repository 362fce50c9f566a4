#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "readward/actor_critic.hpp"
#include "readward/env.hpp"
#include "readward/interact.hpp"
#include "readward/reason.hpp"
#include "readward/trace.hpp"

namespace readward::agents {

/// Feature vector: agent position, then per object class the offset to the
/// nearest instance and the instance count relative to the episode start.
/// Every component lies in [-1, 1].
class ObsEncoder {
public:
  static constexpr int kKeyDims = 4;
  static constexpr int kBins = 8;

  ObsEncoder(int width, int height, std::vector<std::string> classes);
  explicit ObsEncoder(const env::Env& env);

  /// Records the initial per-class counts used for normalisation.
  void reset(const env::StepResult& first);
  Eigen::VectorXd encode(const env::StepResult& frame) const;
  int dim() const { return 2 + 3 * static_cast<int>(classes_.size()); }

  /// Bin of one normalised offset: 0..6 from far negative to far positive with
  /// 3 for zero, 7 when the class is absent.
  static int bin(double offset, bool present);
  /// Quantised key over the nearest offsets of the first two classes.
  long state_key(const Eigen::VectorXd& obs) const;
  static constexpr long num_keys() { return 8L * 8 * 8 * 8; }

private:
  int width_;
  int height_;
  std::vector<std::string> classes_;
  std::vector<double> initial_counts_;
};

/// Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a)); the bootstrap term is
/// dropped when `terminal`. Rows are states, columns actions.
void q_update(Eigen::Ref<Eigen::MatrixXd> q, long s, int a, double r, long s_next, double alpha, double gamma,
              bool terminal = false);

struct QOptions {
  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Fraction of the step budget over which epsilon decays linearly.
  double epsilon_decay = 0.5;
};

class QLearner {
public:
  QLearner(long num_states, int num_actions, QOptions options, std::uint64_t seed);

  double epsilon(long step, long total_steps) const;
  /// Epsilon-greedy with uniform tie-breaking among greedy actions.
  int act(long state, double epsilon);
  void learn(long s, int a, double r, long s_next, bool terminal);

  const Eigen::MatrixXd& table() const { return q_; }

private:
  Eigen::MatrixXd q_;
  QOptions options_;
  std::mt19937_64 rng_;
};

struct A2CConfig {
  int hidden = 64;
  int n_steps = 5;
  A2COptions optimizer{};
  double rms_decay = 0.99;
  double rms_eps = 1e-5;

  A2CConfig() { optimizer.max_grad_norm = 0.5; }
};

class A2CLearner {
public:
  A2CLearner(int obs_dim, int num_actions, A2CConfig config, std::uint64_t seed);

  struct Decision {
    int action;
    double value;
    double log_prob;
  };
  Decision act(const Eigen::VectorXd& obs);
  double value(const Eigen::VectorXd& obs) const;
  /// RMSprop step on one rollout segment. Throws DivergenceError.
  void learn(const Trajectory& traj);

  const PolicyParams<double>& params() const { return params_; }
  const A2CConfig& config() const { return config_; }

private:
  PolicyParams<double> params_;
  A2CConfig config_;
  RmsProp rms_;
  std::mt19937_64 rng_;
};

enum class AgentKind { q, a2c, random };

std::string to_string(AgentKind kind);
AgentKind parse_agent(const std::string& name);

struct TrainOptions {
  AgentKind agent = AgentKind::q;
  long steps = 200000;
  std::uint64_t seed = 0;
  bool clip_rewards = true;
  QOptions q;
  A2CConfig a2c;
  std::optional<interact::NoiseModel> noise;
};

struct TrainHooks {
  std::function<void(int episode, const interact::InteractionEvent&, double aux)> on_event;
  std::function<void(int episode, const env::StepResult&)> on_frame;
};

struct TrainResult {
  std::vector<EpisodeTrace> episodes;
  nlohmann::json checkpoint;
};

/// Throws ConfigError when the table names none of the env's object classes.
void check_compatible(const env::Env& env, const reason::RewardTable& table);

double clip_reward(double r);

/// Runs `steps` environment steps. Episode k is reset with a seed derived from
/// the env's configured seed and k. Without a table no interaction pipeline
/// runs and every aux reward is 0. The final episode is marked incomplete when
/// the budget ends inside it.
TrainResult train(env::Env& env, const reason::RewardTable* table, const TrainOptions& options,
                  const TrainHooks& hooks = {});

/// Stable 64-bit FNV-1a digest, hex encoded.
std::string config_hash(const nlohmann::json& config);

}  // namespace readward::agents
