#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace readward::env {

/// Side length in logical pixels of one grid cell. A 40x52 grid maps onto a
/// 160x208 logical screen.
inline constexpr int kCellPixels = 4;

/// Axis-aligned box in grid cells, bounds inclusive on both ends.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  long area() const { return static_cast<long>(width()) * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline BBox cell_box(int x, int y) { return {x, y, x, y}; }

/// Boxes intersect when they share at least one cell. Because bounds are
/// inclusive, boxes whose boundary cells coincide count as touching.
bool intersects(const BBox& a, const BBox& b);
BBox united(const BBox& a, const BBox& b);
/// Shared cell count; zero for disjoint boxes.
long overlap_area(const BBox& a, const BBox& b);
bool inside(const BBox& box, int width, int height);

struct GameObject {
  int id = 0;
  std::string class_name;
  BBox box;
  bool is_agent = false;

  friend bool operator==(const GameObject&, const GameObject&) = default;
};

/// One byte per cell holding the class index painted there (0 = background,
/// 1 = wall, 2 = agent, 3.. = object classes in object_classes() order).
using Frame = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kWall = 1;
inline constexpr std::uint8_t kAgentIndex = 2;

struct StepResult {
  Frame frame;
  std::vector<GameObject> objects;
  /// Reward as reported to the learner (zero until the terminal step when delayed).
  double reward = 0.0;
  /// The game's own per-step reward, independent of any wrapper.
  double native_reward = 0.0;
  bool terminal = false;
  /// Number of steps taken since reset.
  int step = 0;
  int lives = 0;

  const GameObject& agent() const;
};

bool operator==(const StepResult& a, const StepResult& b);

enum class Game { ski_run, dot_maze, brick_wall };

std::string to_string(Game game);
/// Throws ConfigError for unknown names.
Game parse_game(const std::string& name);
std::vector<std::string> game_names();

struct EnvConfig {
  std::string game = "dot_maze";
  std::uint64_t seed = 0;
  int episode_cap = 1000;
  bool delayed = false;
  int width = 40;
  int height = 52;
  /// Named overrides of game constants, e.g. {"pellet_reward", 2.0}.
  std::map<std::string, double> params;

  void validate() const;
};

/// Stateful, single-threaded game. step() after a terminal result throws.
class Env {
public:
  virtual ~Env() = default;

  virtual StepResult reset() = 0;
  virtual StepResult step(int action) = 0;
  /// Seed used by the next reset().
  virtual void reseed(std::uint64_t seed) = 0;

  virtual int num_actions() const = 0;
  virtual std::vector<std::string> action_names() const = 0;
  /// Non-agent object classes this game can emit, in frame-index order.
  virtual std::vector<std::string> object_classes() const = 0;
  virtual std::string agent_class() const = 0;
  virtual const EnvConfig& config() const = 0;
  virtual bool delayed() const { return false; }
};

/// Builds the game named in the config, wrapped for delayed reward when
/// config.delayed is set. The returned env still needs reset().
std::unique_ptr<Env> make_env(const EnvConfig& config);

/// Reports zero reward until the terminal step, which carries the episode's
/// native return. Rejects an already-delayed env.
std::unique_ptr<Env> wrap_delayed(std::unique_ptr<Env> inner);

/// Reads a game's tunable constants from config.params, rejecting unknown keys.
class ParamReader {
public:
  ParamReader(const EnvConfig& config, std::vector<std::pair<std::string, double>> defaults);
  double operator()(const std::string& key) const;

private:
  std::map<std::string, double> values_;
};

/// Shared machinery for the three desk games.
class GridGame : public Env {
public:
  explicit GridGame(EnvConfig config);

  StepResult reset() final;
  StepResult step(int action) final;
  void reseed(std::uint64_t seed) final { config_.seed = seed; }
  const EnvConfig& config() const final { return config_; }

protected:
  virtual void on_reset() = 0;
  /// Advances one tick and returns the native reward.
  virtual double on_step(int action) = 0;
  virtual bool game_over() const = 0;
  virtual void collect_objects(std::vector<GameObject>& out) const = 0;
  virtual void paint_static(Frame&) const {}

  std::uint8_t class_index(const std::string& class_name) const;

  EnvConfig config_;
  std::mt19937_64 rng_;
  int lives_ = 0;

private:
  StepResult observe(double reward);

  int steps_ = 0;
  bool terminal_ = true;
  Frame static_frame_;
  std::vector<std::string> classes_;
};

}  // namespace readward::env
