// Pellet-eating maze with wandering ghosts.
//
// Layout: border walls plus 2x2 pillar blocks (optional), pellets on the odd
// lattice of open cells. The agent starts bottom-centre, ghosts along the top.
// A pellet the agent steps on scores immediately and stays visible for that
// one frame so the contact is observable; it disappears on the next tick. A
// ghost collision likewise shows both sprites on one cell before the agent
// respawns at the start of the following tick.

#include <algorithm>
#include <array>
#include <cstdlib>

#include "games.hpp"
#include "readward/errors.hpp"

namespace readward::env {
namespace {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

constexpr std::array<Cell, 4> kMoves{{{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};  // up down left right

class DotMaze final : public GridGame {
public:
  explicit DotMaze(const EnvConfig& config)
      : GridGame(config),
        params_(config_, {{"pellet_reward", 1.0},
                          {"ghost_penalty", -10.0},
                          {"lives", 3.0},
                          {"ghosts", 2.0},
                          {"chase_bias", 0.3},
                          {"pillars", 1.0}}) {
    if (params_("lives") < 1) throw ConfigError("dot_maze: lives must be >= 1");
    if (params_("ghosts") < 0) throw ConfigError("dot_maze: ghosts must be >= 0");
    const double bias = params_("chase_bias");
    if (bias < 0.0 || bias > 1.0) throw ConfigError("dot_maze: chase_bias must be in [0, 1]");
  }

  int num_actions() const override { return 4; }
  std::vector<std::string> action_names() const override { return {"up", "down", "left", "right"}; }
  std::vector<std::string> object_classes() const override { return {"ghost", "pellet"}; }
  std::string agent_class() const override { return "agent"; }

protected:
  void on_reset() override {
    const int w = config_.width;
    const int h = config_.height;
    walls_.assign(static_cast<size_t>(w * h), false);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
        const bool pillar = params_("pillars") != 0.0 && x % 6 >= 3 && x % 6 <= 4 &&
                            y % 6 >= 3 && y % 6 <= 4 && x < w - 2 && y < h - 2;
        walls_[index(x, y)] = border || pillar;
      }
    }
    agent_start_ = {w / 2, h - 2};
    walls_[index(agent_start_.x, agent_start_.y)] = false;

    const int n_ghosts = static_cast<int>(params_("ghosts"));
    ghost_starts_.clear();
    for (int i = 0; i < n_ghosts; ++i) {
      const int span = std::max(1, w - 3);
      Cell c{1 + (n_ghosts == 1 ? span / 2 : i * span / std::max(1, n_ghosts - 1)), 1};
      c.x = std::clamp(c.x, 1, w - 2);
      walls_[index(c.x, c.y)] = false;
      ghost_starts_.push_back(c);
    }

    pellets_.clear();
    int next_id = 1 + n_ghosts;
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        if (walls_[index(x, y)] || x % 2 == 0 || y % 2 == 0) continue;
        const Cell c{x, y};
        if (c == agent_start_) continue;
        if (std::find(ghost_starts_.begin(), ghost_starts_.end(), c) != ghost_starts_.end()) continue;
        pellets_.push_back({next_id++, c, false});
      }
    }
    agent_ = agent_start_;
    ghosts_ = ghost_starts_;
    lives_ = static_cast<int>(params_("lives"));
    respawn_pending_ = false;
  }

  double on_step(int action) override {
    std::erase_if(pellets_, [](const Pellet& p) { return p.eaten; });
    if (respawn_pending_) {
      agent_ = agent_start_;
      ghosts_ = ghost_starts_;
      respawn_pending_ = false;
    }

    double reward = 0.0;
    const Cell before = agent_;
    const Cell target{agent_.x + kMoves[action].x, agent_.y + kMoves[action].y};
    if (open(target)) agent_ = target;

    for (auto& p : pellets_) {
      if (p.cell == agent_) {
        p.eaten = true;
        reward += params_("pellet_reward");
      }
    }

    std::bernoulli_distribution chase(params_("chase_bias"));
    bool caught = false;
    for (auto& g : ghosts_) {
      const Cell from = g;
      g = move_ghost(g, chase(rng_));
      const bool swapped = g == before && from == agent_;
      if (swapped) g = agent_;
      if (g == agent_) caught = true;
    }
    if (caught) {
      reward += params_("ghost_penalty");
      --lives_;
      respawn_pending_ = true;
    }
    return reward;
  }

  bool game_over() const override {
    if (lives_ <= 0) return true;
    return std::none_of(pellets_.begin(), pellets_.end(), [](const Pellet& p) { return !p.eaten; });
  }

  void collect_objects(std::vector<GameObject>& out) const override {
    out.reserve(1 + ghosts_.size() + pellets_.size());
    out.push_back({0, "agent", cell_box(agent_.x, agent_.y), true});
    for (size_t i = 0; i < ghosts_.size(); ++i) {
      out.push_back({static_cast<int>(1 + i), "ghost", cell_box(ghosts_[i].x, ghosts_[i].y), false});
    }
    for (const auto& p : pellets_) out.push_back({p.id, "pellet", cell_box(p.cell.x, p.cell.y), false});
  }

  void paint_static(Frame& frame) const override {
    for (int y = 0; y < config_.height; ++y) {
      for (int x = 0; x < config_.width; ++x) {
        if (walls_[index(x, y)]) frame(y, x) = kWall;
      }
    }
  }

private:
  struct Pellet {
    int id;
    Cell cell;
    bool eaten;
  };

  size_t index(int x, int y) const { return static_cast<size_t>(y * config_.width + x); }

  bool open(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.x < config_.width && c.y < config_.height && !walls_[index(c.x, c.y)];
  }

  Cell move_ghost(const Cell& g, bool chase) {
    std::array<Cell, 4> options{};
    size_t n = 0;
    for (const auto& m : kMoves) {
      const Cell c{g.x + m.x, g.y + m.y};
      if (open(c)) options[n++] = c;
    }
    if (n == 0) return g;
    if (chase) {
      auto dist = [&](const Cell& c) { return std::abs(c.x - agent_.x) + std::abs(c.y - agent_.y); };
      return *std::min_element(options.begin(), options.begin() + static_cast<long>(n),
                               [&](const Cell& a, const Cell& b) { return dist(a) < dist(b); });
    }
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    return options[pick(rng_)];
  }

  ParamReader params_;
  std::vector<bool> walls_;
  Cell agent_start_;
  Cell agent_;
  std::vector<Cell> ghost_starts_;
  std::vector<Cell> ghosts_;
  std::vector<Pellet> pellets_;
  bool respawn_pending_ = false;
};

}  // namespace

std::unique_ptr<Env> make_dot_maze(const EnvConfig& config) { return std::make_unique<DotMaze>(config); }

}  // namespace readward::env
