// Paddle-and-ball wall breaker.
//
// The ball moves one cell per axis per tick and reflects off the side and top
// walls, off bricks (which it removes) and off the paddle. When it reaches the
// paddle row over the paddle it is drawn inside the paddle box for that frame
// before heading back up; below the paddle it is lost.

#include <algorithm>

#include "games.hpp"
#include "readward/errors.hpp"

namespace readward::env {
namespace {

class BrickWall final : public GridGame {
public:
  explicit BrickWall(const EnvConfig& config)
      : GridGame(config),
        params_(config_, {{"brick_reward", 1.0},
                          {"drop_penalty", -5.0},
                          {"lives", 3.0},
                          {"brick_rows", 4.0},
                          {"brick_width", 4.0},
                          {"paddle_width", 6.0},
                          {"paddle_speed", 2.0}}) {
    if (params_("lives") < 1) throw ConfigError("brick_wall: lives must be >= 1");
    if (params_("brick_width") < 1 || params_("paddle_width") < 1 || params_("paddle_speed") < 1) {
      throw ConfigError("brick_wall: widths and speed must be >= 1");
    }
    if (params_("paddle_width") > config_.width - 2) throw ConfigError("brick_wall: paddle wider than field");
    if (config_.height < 4 + params_("brick_rows") + 6) throw ConfigError("brick_wall: grid too short");
  }

  int num_actions() const override { return 3; }
  std::vector<std::string> action_names() const override { return {"left", "right", "noop"}; }
  std::vector<std::string> object_classes() const override { return {"ball", "brick"}; }
  std::string agent_class() const override { return "paddle"; }

protected:
  void on_reset() override {
    const int w = config_.width;
    const int bw = static_cast<int>(params_("brick_width"));
    const int per_row = (w - 2) / bw;
    const int x0 = 1 + ((w - 2) - per_row * bw) / 2;
    bricks_.clear();
    int id = 2;
    for (int r = 0; r < static_cast<int>(params_("brick_rows")); ++r) {
      for (int i = 0; i < per_row; ++i) {
        bricks_.push_back({id++, BBox{x0 + i * bw, 4 + r, x0 + (i + 1) * bw - 1, 4 + r}});
      }
    }
    paddle_w_ = static_cast<int>(params_("paddle_width"));
    paddle_y_ = config_.height - 3;
    paddle_x_ = (w - paddle_w_) / 2;
    lives_ = static_cast<int>(params_("lives"));
    serve();
  }

  double on_step(int action) override {
    if (serve_pending_) serve();

    const int speed = static_cast<int>(params_("paddle_speed"));
    if (action == 0) paddle_x_ -= speed;
    if (action == 1) paddle_x_ += speed;
    paddle_x_ = std::clamp(paddle_x_, 1, config_.width - 1 - paddle_w_);

    double reward = 0.0;
    int nx = ball_x_ + vx_;
    int ny = ball_y_ + vy_;
    if (nx < 1 || nx > config_.width - 2) {
      vx_ = -vx_;
      nx = ball_x_ + vx_;
    }
    if (ny < 1) {
      vy_ = -vy_;
      ny = ball_y_ + vy_;
    }
    auto hit = std::find_if(bricks_.begin(), bricks_.end(),
                            [&](const Brick& b) { return intersects(b.box, cell_box(nx, ny)); });
    if (hit != bricks_.end()) {
      bricks_.erase(hit);
      reward += params_("brick_reward");
      vy_ = -vy_;
      return reward;  // ball holds position while reflecting off a brick
    }
    ball_x_ = nx;
    ball_y_ = ny;
    if (ball_y_ == paddle_y_ && ball_x_ >= paddle_x_ && ball_x_ < paddle_x_ + paddle_w_) {
      vy_ = -1;
    } else if (ball_y_ > paddle_y_) {
      reward += params_("drop_penalty");
      --lives_;
      serve_pending_ = true;
    }
    return reward;
  }

  bool game_over() const override { return lives_ <= 0 || bricks_.empty(); }

  void collect_objects(std::vector<GameObject>& out) const override {
    out.reserve(2 + bricks_.size());
    out.push_back({0, "paddle", BBox{paddle_x_, paddle_y_, paddle_x_ + paddle_w_ - 1, paddle_y_}, true});
    out.push_back({1, "ball", cell_box(ball_x_, ball_y_), false});
    for (const auto& b : bricks_) out.push_back({b.id, "brick", b.box, false});
  }

  void paint_static(Frame& frame) const override {
    frame.row(0).setConstant(kWall);
    frame.col(0).setConstant(kWall);
    frame.col(config_.width - 1).setConstant(kWall);
  }

private:
  struct Brick {
    int id;
    BBox box;
  };

  void serve() {
    std::uniform_int_distribution<int> x(2, config_.width - 3);
    std::bernoulli_distribution right(0.5);
    ball_x_ = x(rng_);
    ball_y_ = 4 + static_cast<int>(params_("brick_rows")) + 2;
    vx_ = right(rng_) ? 1 : -1;
    vy_ = 1;
    serve_pending_ = false;
  }

  ParamReader params_;
  std::vector<Brick> bricks_;
  int paddle_x_ = 0;
  int paddle_y_ = 0;
  int paddle_w_ = 0;
  int ball_x_ = 0;
  int ball_y_ = 0;
  int vx_ = 1;
  int vy_ = 1;
  bool serve_pending_ = false;
};

}  // namespace

std::unique_ptr<Env> make_brick_wall(const EnvConfig& config) { return std::make_unique<BrickWall>(config); }

}  // namespace readward::env
