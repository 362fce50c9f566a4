#include <algorithm>
#include <cstdio>

#include "readward/agents.hpp"
#include "readward/errors.hpp"
#include "readward/log.hpp"

namespace readward::agents {

using nlohmann::json;

void check_compatible(const env::Env& env, const reason::RewardTable& table) {
  for (const auto& c : env.object_classes()) {
    if (table.reward_for(c)) return;
  }
  throw ConfigError("reward table covers none of the object classes of " + env.config().game);
}

double clip_reward(double r) { return std::clamp(r, -1.0, 1.0); }

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::uint64_t episode_seed(std::uint64_t base, int episode) {
  return base * 1000003ULL + static_cast<std::uint64_t>(episode);
}

json options_json(const env::Env& env, const TrainOptions& o, bool assisted) {
  json j = {{"game", env.config().game},
            {"env_seed", env.config().seed},
            {"episode_cap", env.config().episode_cap},
            {"delayed", env.delayed()},
            {"agent", to_string(o.agent)},
            {"steps", o.steps},
            {"seed", o.seed},
            {"clip_rewards", o.clip_rewards},
            {"assisted", assisted},
            {"noise", o.noise ? o.noise->to_string() : ""}};
  if (o.agent == AgentKind::q) {
    j["q"] = {{"alpha", o.q.alpha},
              {"gamma", o.q.gamma},
              {"epsilon_start", o.q.epsilon_start},
              {"epsilon_end", o.q.epsilon_end},
              {"epsilon_decay", o.q.epsilon_decay}};
  } else if (o.agent == AgentKind::a2c) {
    j["a2c"] = {{"hidden", o.a2c.hidden},
                {"n_steps", o.a2c.n_steps},
                {"lr", o.a2c.optimizer.lr},
                {"gamma", o.a2c.optimizer.gamma},
                {"value_coef", o.a2c.optimizer.coef.value},
                {"entropy_coef", o.a2c.optimizer.coef.entropy},
                {"max_grad_norm", o.a2c.optimizer.max_grad_norm}};
  }
  return j;
}

json q_checkpoint(const QLearner& q) {
  json rows = json::object();
  const auto& t = q.table();
  for (Eigen::Index s = 0; s < t.rows(); ++s) {
    if (t.row(s).isZero(0.0)) continue;
    auto& row = rows[std::to_string(s)] = json::array();
    for (Eigen::Index a = 0; a < t.cols(); ++a) row.push_back(t(s, a));
  }
  return {{"states", t.rows()}, {"actions", t.cols()}, {"rows", rows}};
}

json a2c_checkpoint(const A2CLearner& l) {
  const auto flat = flatten(l.params());
  return {{"obs_dim", l.params().actor.input_dim()},
          {"hidden", l.config().hidden},
          {"actions", l.params().actor.output_dim()},
          {"params", std::vector<double>(flat.data(), flat.data() + flat.size())}};
}

}  // namespace

TrainResult train(env::Env& env, const reason::RewardTable* table, const TrainOptions& options,
                  const TrainHooks& hooks) {
  if (options.steps <= 0) throw ConfigError("training steps must be positive");
  if (table) check_compatible(env, *table);

  const std::uint64_t base_seed = env.config().seed;
  ObsEncoder encoder(env);
  std::optional<interact::InteractionMonitor> monitor;
  if (table) monitor.emplace(env.agent_class(), env.object_classes(), options.noise);

  std::optional<QLearner> q;
  std::optional<A2CLearner> ac;
  std::mt19937_64 random_rng(options.seed);
  switch (options.agent) {
    case AgentKind::q: q.emplace(ObsEncoder::num_keys(), env.num_actions(), options.q, options.seed); break;
    case AgentKind::a2c: ac.emplace(encoder.dim(), env.num_actions(), options.a2c, options.seed); break;
    case AgentKind::random: break;
  }
  std::uniform_int_distribution<int> uniform_action(0, env.num_actions() - 1);

  TrainResult result;
  long step = 0;
  int episode = 0;
  while (step < options.steps) {
    env.reseed(episode_seed(base_seed, episode));
    auto frame = env.reset();
    encoder.reset(frame);
    if (monitor) {
      monitor->reset();
      monitor->observe(frame);
    }
    if (hooks.on_frame) hooks.on_frame(episode, frame);

    EpisodeTrace trace;
    trace.episode = episode;
    trace.start_step = step;
    Eigen::VectorXd obs = encoder.encode(frame);
    Trajectory segment;
    std::vector<Eigen::VectorXd> segment_obs;

    bool terminal = false;
    while (!terminal && step < options.steps) {
      int action = 0;
      A2CLearner::Decision decision{};
      const double eps = q ? q->epsilon(step, options.steps) : 0.0;
      const long key = q ? encoder.state_key(obs) : 0;
      if (q) {
        action = q->act(key, eps);
      } else if (ac) {
        decision = ac->act(obs);
        action = decision.action;
      } else {
        action = uniform_action(random_rng);
      }

      auto next = env.step(action);
      ++step;
      terminal = next.terminal;
      if (hooks.on_frame) hooks.on_frame(episode, next);

      double aux = 0.0;
      if (monitor) {
        auto events = monitor->observe(next);
        aux = interact::shape(events, *table);
        for (const auto& e : events) {
          if (hooks.on_event) hooks.on_event(episode, e, table->reward_for(e.object_class).value_or(0.0));
          trace.events.push_back(e);
        }
      }
      const double sum = next.reward + aux;
      const double total = options.clip_rewards ? clip_reward(sum) : sum;
      trace.steps.push_back({action, next.reward, next.native_reward, aux, total});

      Eigen::VectorXd next_obs = encoder.encode(next);
      if (q) {
        q->learn(key, action, total, encoder.state_key(next_obs), terminal);
      } else if (ac) {
        segment_obs.push_back(obs);
        segment.actions.push_back(action);
        segment.rewards.push_back(total);
        segment.values.push_back(decision.value);
        segment.log_probs.push_back(decision.log_prob);
        segment.dones.push_back(terminal);
        const bool flush = terminal || static_cast<int>(segment.actions.size()) >= options.a2c.n_steps ||
                           step >= options.steps;
        if (flush) {
          segment.obs.resize(encoder.dim(), static_cast<Eigen::Index>(segment_obs.size()));
          for (size_t i = 0; i < segment_obs.size(); ++i) segment.obs.col(static_cast<Eigen::Index>(i)) = segment_obs[i];
          segment.bootstrap_value = terminal ? 0.0 : ac->value(next_obs);
          ac->learn(segment);
          segment = {};
          segment_obs.clear();
        }
      }
      obs = std::move(next_obs);
    }
    trace.complete = terminal;
    result.episodes.push_back(std::move(trace));
    ++episode;
  }

  json cp = {{"version", 1}, {"config", options_json(env, options, table != nullptr)}};
  cp["config_hash"] = config_hash(cp["config"]);
  if (q) cp["q_table"] = q_checkpoint(*q);
  if (ac) cp["policy"] = a2c_checkpoint(*ac);
  if (table) cp["rewards"] = reason::to_json(*table);
  result.checkpoint = std::move(cp);
  return result;
}

}  // namespace readward::agents
