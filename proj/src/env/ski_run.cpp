// Downhill slalom. The skier holds a fixed row while the course scrolls up one
// row per tick. A gate is a horizontal span between two flags; it is scored
// once, on the tick its row reaches the skier: inside the span passes, outside
// misses. Trees cost a penalty on first contact.

#include <algorithm>

#include "games.hpp"
#include "readward/errors.hpp"

namespace readward::env {
namespace {

class SkiRun final : public GridGame {
public:
  explicit SkiRun(const EnvConfig& config)
      : GridGame(config),
        params_(config_, {{"gate_reward", 10.0},
                          {"gate_penalty", -5.0},
                          {"tree_penalty", -2.0},
                          {"gates", 10.0},
                          {"gate_spacing", 12.0},
                          {"gate_width", 8.0},
                          {"tree_prob", 0.08}}) {
    if (params_("gates") < 1) throw ConfigError("ski_run: gates must be >= 1");
    if (params_("gate_spacing") < 2) throw ConfigError("ski_run: gate_spacing must be >= 2");
    if (params_("gate_width") < 3 || params_("gate_width") > config_.width - 6) {
      throw ConfigError("ski_run: gate_width out of range");
    }
    const double p = params_("tree_prob");
    if (p < 0.0 || p > 1.0) throw ConfigError("ski_run: tree_prob must be in [0, 1]");
  }

  int num_actions() const override { return 3; }
  std::vector<std::string> action_names() const override { return {"left", "right", "noop"}; }
  std::vector<std::string> object_classes() const override { return {"gate", "tree"}; }
  std::string agent_class() const override { return "skier"; }

protected:
  void on_reset() override {
    skier_x_ = config_.width / 2;
    skier_y_ = 4;
    items_.clear();
    next_id_ = 1;
    gates_spawned_ = 0;
    gates_resolved_ = 0;
    rows_since_gate_ = 0;
    lives_ = 1;
    // Pre-scroll so the first gate is already on screen.
    for (int i = 0; i < config_.height / 2; ++i) scroll();
  }

  double on_step(int action) override {
    if (action == 0) skier_x_ = std::max(1, skier_x_ - 1);
    if (action == 1) skier_x_ = std::min(config_.width - 2, skier_x_ + 1);
    scroll();

    double reward = 0.0;
    const BBox skier = skier_box();
    for (auto& it : items_) {
      if (it.resolved) continue;
      if (it.is_gate) {
        if (it.box.y_min > skier.y_max || it.box.y_max < skier.y_min) continue;
        const bool through = skier.x_min >= it.box.x_min && skier.x_max <= it.box.x_max;
        reward += through ? params_("gate_reward") : params_("gate_penalty");
        it.resolved = true;
        ++gates_resolved_;
      } else if (intersects(it.box, skier)) {
        reward += params_("tree_penalty");
        it.resolved = true;
      }
    }
    return reward;
  }

  bool game_over() const override { return gates_resolved_ >= static_cast<int>(params_("gates")); }

  void collect_objects(std::vector<GameObject>& out) const override {
    out.reserve(1 + items_.size());
    out.push_back({0, "skier", skier_box(), true});
    for (const auto& it : items_) out.push_back({it.id, it.is_gate ? "gate" : "tree", it.box, false});
  }

private:
  struct Item {
    int id;
    bool is_gate;
    BBox box;
    bool resolved;
  };

  BBox skier_box() const { return {skier_x_, skier_y_, skier_x_, skier_y_ + 1}; }

  // Moves the course up one row, drops what leaves the top, spawns at the bottom.
  void scroll() {
    for (auto& it : items_) {
      --it.box.y_min;
      --it.box.y_max;
    }
    std::erase_if(items_, [](const Item& it) { return it.box.y_min < 0; });

    const int bottom = config_.height - 2;
    ++rows_since_gate_;
    if (gates_spawned_ < static_cast<int>(params_("gates")) &&
        rows_since_gate_ >= static_cast<int>(params_("gate_spacing"))) {
      const int gw = static_cast<int>(params_("gate_width"));
      std::uniform_int_distribution<int> left(3, config_.width - 3 - gw);
      const int x = left(rng_);
      items_.push_back({next_id_++, true, BBox{x, bottom, x + gw - 1, bottom}, false});
      ++gates_spawned_;
      rows_since_gate_ = 0;
      return;
    }
    std::bernoulli_distribution tree(params_("tree_prob"));
    if (rows_since_gate_ > 2 && tree(rng_)) {
      std::uniform_int_distribution<int> x(1, config_.width - 3);
      const int tx = x(rng_);
      items_.push_back({next_id_++, false, BBox{tx, bottom - 1, tx + 1, bottom}, false});
    }
  }

  ParamReader params_;
  std::vector<Item> items_;
  int skier_x_ = 0;
  int skier_y_ = 0;
  int next_id_ = 1;
  int gates_spawned_ = 0;
  int gates_resolved_ = 0;
  int rows_since_gate_ = 0;
};

}  // namespace

std::unique_ptr<Env> make_ski_run(const EnvConfig& config) { return std::make_unique<SkiRun>(config); }

}  // namespace readward::env
