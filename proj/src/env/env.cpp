#include "readward/env.hpp"

#include <algorithm>
#include <cmath>

#include "readward/errors.hpp"
#include "games.hpp"

namespace readward::env {

bool intersects(const BBox& a, const BBox& b) {
  return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max && b.y_min <= a.y_max;
}

BBox united(const BBox& a, const BBox& b) {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

long overlap_area(const BBox& a, const BBox& b) {
  const int w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const int h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  if (w <= 0 || h <= 0) return 0;
  return static_cast<long>(w) * h;
}

bool inside(const BBox& box, int width, int height) {
  return box.valid() && box.x_min >= 0 && box.y_min >= 0 && box.x_max < width && box.y_max < height;
}

const GameObject& StepResult::agent() const {
  auto it = std::find_if(objects.begin(), objects.end(), [](const auto& o) { return o.is_agent; });
  if (it == objects.end()) throw PreconditionError("frame has no agent");
  return *it;
}

bool operator==(const StepResult& a, const StepResult& b) {
  return a.frame.rows() == b.frame.rows() && a.frame.cols() == b.frame.cols() &&
         (a.frame == b.frame).all() && a.objects == b.objects && a.reward == b.reward &&
         a.native_reward == b.native_reward && a.terminal == b.terminal && a.step == b.step &&
         a.lives == b.lives;
}

std::string to_string(Game game) {
  switch (game) {
    case Game::ski_run: return "ski_run";
    case Game::dot_maze: return "dot_maze";
    case Game::brick_wall: return "brick_wall";
  }
  return "?";
}

Game parse_game(const std::string& name) {
  if (name == "ski_run") return Game::ski_run;
  if (name == "dot_maze") return Game::dot_maze;
  if (name == "brick_wall") return Game::brick_wall;
  throw ConfigError("unknown game '" + name + "' (expected ski_run, dot_maze or brick_wall)");
}

std::vector<std::string> game_names() { return {"ski_run", "dot_maze", "brick_wall"}; }

void EnvConfig::validate() const {
  parse_game(game);
  if (episode_cap <= 0) throw ConfigError("episode_cap must be positive");
  if (width < 5 || height < 5) throw ConfigError("grid must be at least 5x5 cells");
  if (width > 255 || height > 255) throw ConfigError("grid larger than 255 cells per side");
}

ParamReader::ParamReader(const EnvConfig& config,
                         std::vector<std::pair<std::string, double>> defaults) {
  for (auto& [k, v] : defaults) values_[k] = v;
  for (const auto& [k, v] : config.params) {
    auto it = values_.find(k);
    if (it == values_.end()) {
      throw ConfigError("unknown parameter '" + k + "' for game " + config.game);
    }
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' is not finite");
    it->second = v;
  }
}

double ParamReader::operator()(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw PreconditionError("parameter '" + key + "' not declared");
  return it->second;
}

GridGame::GridGame(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

StepResult GridGame::reset() {
  rng_.seed(config_.seed);
  steps_ = 0;
  terminal_ = false;
  on_reset();
  classes_ = object_classes();
  static_frame_ = Frame::Constant(config_.height, config_.width, kBackground);
  paint_static(static_frame_);
  return observe(0.0);
}

StepResult GridGame::step(int action) {
  if (terminal_) throw PreconditionError("step() called on a terminal episode; reset() first");
  if (action < 0 || action >= num_actions()) {
    throw PreconditionError("action " + std::to_string(action) + " out of range [0, " +
                            std::to_string(num_actions()) + ")");
  }
  const double reward = on_step(action);
  ++steps_;
  terminal_ = game_over() || steps_ >= config_.episode_cap;
  return observe(reward);
}

std::uint8_t GridGame::class_index(const std::string& class_name) const {
  if (class_name == agent_class()) return kAgentIndex;
  auto it = std::find(classes_.begin(), classes_.end(), class_name);
  if (it == classes_.end()) return kBackground;
  return static_cast<std::uint8_t>(3 + (it - classes_.begin()));
}

StepResult GridGame::observe(double reward) {
  StepResult r;
  r.frame = static_frame_;
  collect_objects(r.objects);
  // Agent painted last so it stays visible on top of what it touches.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& o : r.objects) {
      if (o.is_agent != (pass == 1)) continue;
      const auto idx = o.is_agent ? kAgentIndex : class_index(o.class_name);
      r.frame.block(o.box.y_min, o.box.x_min, o.box.height(), o.box.width()).setConstant(idx);
    }
  }
  r.reward = reward;
  r.native_reward = reward;
  r.terminal = terminal_;
  r.step = steps_;
  r.lives = lives_;
  return r;
}

namespace {

class DelayedEnv final : public Env {
public:
  explicit DelayedEnv(std::unique_ptr<Env> inner) : inner_(std::move(inner)) {}

  StepResult reset() override {
    pending_ = 0.0;
    auto r = inner_->reset();
    r.reward = 0.0;
    return r;
  }

  StepResult step(int action) override {
    auto r = inner_->step(action);
    pending_ += r.native_reward;
    if (r.terminal) {
      r.reward = pending_;
      pending_ = 0.0;
    } else {
      r.reward = 0.0;
    }
    return r;
  }

  void reseed(std::uint64_t seed) override { inner_->reseed(seed); }
  int num_actions() const override { return inner_->num_actions(); }
  std::vector<std::string> action_names() const override { return inner_->action_names(); }
  std::vector<std::string> object_classes() const override { return inner_->object_classes(); }
  std::string agent_class() const override { return inner_->agent_class(); }
  const EnvConfig& config() const override { return inner_->config(); }
  bool delayed() const override { return true; }

private:
  std::unique_ptr<Env> inner_;
  double pending_ = 0.0;
};

}  // namespace

std::unique_ptr<Env> wrap_delayed(std::unique_ptr<Env> inner) {
  if (!inner) throw PreconditionError("wrap_delayed: null env");
  if (inner->delayed()) throw PreconditionError("env is already wrapped for delayed reward");
  return std::make_unique<DelayedEnv>(std::move(inner));
}

std::unique_ptr<Env> make_env(const EnvConfig& config) {
  config.validate();
  std::unique_ptr<Env> env;
  switch (parse_game(config.game)) {
    case Game::ski_run: env = make_ski_run(config); break;
    case Game::dot_maze: env = make_dot_maze(config); break;
    case Game::brick_wall: env = make_brick_wall(config); break;
  }
  if (config.delayed) env = wrap_delayed(std::move(env));
  return env;
}

}  // namespace readward::env
