#include <doctest.h>

#include <random>
#include <set>

#include "readward/errors.hpp"
#include "readward/harness.hpp"
#include "support.hpp"

using namespace readward;
using namespace readward::harness;

namespace {

EpisodeTrace episode(int index, double score, double aux, long start = 0) {
  EpisodeTrace e;
  e.episode = index;
  e.start_step = start;
  e.steps.push_back({0, score, score, aux, 0.0});
  e.complete = true;
  return e;
}

// Zero until `reach`, then flat at `level`.
std::vector<CurvePoint> plateau(long total, long reach, double level, int points = 20) {
  std::vector<CurvePoint> c;
  for (int i = 1; i <= points; ++i) {
    const long step = total * i / points;
    c.push_back({step, step >= reach ? level : 0.0});
  }
  return c;
}

RunReport synthetic_report(const std::string& game, long steps, double mean, std::vector<CurvePoint> curve) {
  RunReport r;
  r.game = game;
  r.steps = steps;
  ArmReport a;
  a.arm = "assisted";
  a.mean = mean;
  a.curve = std::move(curve);
  r.arms.push_back(a);
  return r;
}

RunConfig small_run(const testing::TempDir& dir, const std::string& name) {
  RunConfig c;
  c.game = "dot_maze";
  c.seeds = {1, 2, 3};
  c.steps = 4000;
  c.episode_cap = 150;
  c.window = 5;
  c.out = dir / name;
  return c;
}

}  // namespace

TEST_CASE("correlation of aligned, opposed and independent columns") {
  std::vector<EpisodeTrace> same, opposite;
  for (int i = 0; i < 40; ++i) {
    const double s = (i * 7) % 11;
    same.push_back(episode(i, s, s));
    opposite.push_back(episode(i, s, -s));
  }
  CHECK(*correlation(same, 5) == doctest::Approx(1.0));
  CHECK(*correlation(opposite, 5) == doctest::Approx(-1.0));

  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<EpisodeTrace> noise;
  for (int i = 0; i < 1000; ++i) noise.push_back(episode(i, n(rng), n(rng)));
  CHECK(std::abs(*correlation(noise, 1)) < 0.1);
}

TEST_CASE("correlation edge cases") {
  std::vector<EpisodeTrace> flat;
  for (int i = 0; i < 20; ++i) flat.push_back(episode(i, i, 0.0));
  CHECK_FALSE(correlation(flat, 5).has_value());
  std::vector<EpisodeTrace> short_run(flat.begin(), flat.begin() + 7);
  CHECK_THROWS_AS(correlation(short_run, 5), PreconditionError);
}

TEST_CASE("pearson against a hand computation") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 1, 4, 3};
  // sxy = 3, sxx = syy = 5
  CHECK(*pearson(x, y) == doctest::Approx(0.6));
}

TEST_CASE("final score averages the last complete episodes") {
  std::vector<EpisodeTrace> eps;
  for (int i = 0; i < 10; ++i) eps.push_back(episode(i, i, 0));
  CHECK(final_score(eps, 4) == doctest::Approx((6 + 7 + 8 + 9) / 4.0));
  CHECK(final_score(eps, 50) == doctest::Approx(4.5));
  eps.back().complete = false;
  CHECK(final_score(eps, 2) == doctest::Approx(7.5));
}

TEST_CASE("curves csv schema") {
  std::vector<EpisodeTrace> eps{episode(0, 3, 5, 0), episode(1, -2, -5, 1)};
  eps.push_back(episode(2, 9, 9, 2));
  eps.back().complete = false;
  CHECK(curves_csv(eps) == "step,episode,score,aux_sum\n1,0,3,5\n2,1,-2,-5\n");
}

TEST_CASE("speed-up semantics") {
  const auto baseline = plateau(1'000'000, 1'000'000, 10.0);
  const auto assisted = plateau(1'000'000, 500'000, 14.0);
  CHECK(*speedup_ratio(baseline, assisted) == doctest::Approx(2.0));
  CHECK(*speedup_ratio(baseline, baseline) == doctest::Approx(1.0));
  CHECK_FALSE(speedup_ratio(baseline, plateau(1'000'000, 1'000'000, 5.0)).has_value());
  CHECK(first_reach(baseline, 10.0) == 1'000'000);
}

TEST_CASE("compare reports improvement and speed-up") {
  const auto a = synthetic_report("dot_maze", 1'000'000, 452, plateau(1'000'000, 1'000'000, 452));
  const auto b = synthetic_report("dot_maze", 1'000'000, 580, plateau(1'000'000, 500'000, 580));
  const auto c = compare(a, b);
  CHECK(*c.improvement_pct == doctest::Approx(28.3).epsilon(0.001));
  CHECK(*c.speedup == doctest::Approx(2.0));
  const auto same = compare(a, a);
  CHECK(*same.improvement_pct == 0.0);
  CHECK(*same.speedup == 1.0);
  CHECK(format_comparison(c, "baseline", "assisted").find("28.3%") != std::string::npos);

  CHECK_THROWS_AS(compare(a, synthetic_report("ski_run", 1'000'000, 1, {})), ConfigError);
  CHECK_THROWS_AS(compare(a, synthetic_report("dot_maze", 5, 1, {})), ConfigError);
}

TEST_CASE("learning curves sample trailing means") {
  std::vector<EpisodeTrace> eps;
  for (int i = 0; i < 10; ++i) {
    auto e = episode(i, i, 0, i * 10);
    e.steps.resize(10, e.steps.front());
    e.steps.front().native_reward = i;
    for (size_t k = 1; k < e.steps.size(); ++k) e.steps[k].native_reward = 0;
    eps.push_back(e);
  }
  const auto curve = learning_curve(eps, 100, 2, 10);
  REQUIRE_FALSE(curve.empty());
  CHECK(curve.back().step == 100);
  CHECK(curve.back().score == doctest::Approx(8.5));
  const std::vector<std::vector<CurvePoint>> both{curve, curve};
  CHECK(mean_curve(both) == curve);
}

TEST_CASE("toml config parsing") {
  const auto c = parse_config(R"(
game = "ski_run"
agent = "a2c"
delayed = false
manual = "m.txt"
provider = "lexical"
noise = "miss=0.1,flip=0.2,merge=2"
seeds = [4, 5]
steps = 1234
r_p = 2.5
r_n = 50
arms = "assisted"
[env]
gates = 3
)",
                              "/base");
  CHECK(c.game == "ski_run");
  CHECK(c.agent == agents::AgentKind::a2c);
  CHECK_FALSE(c.delayed);
  CHECK(c.manual == std::filesystem::path("/base/m.txt"));
  CHECK(c.noise->merge_dist == 2);
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.steps == 1234);
  CHECK(c.r_p == 2.5);
  CHECK(c.arms == Arms::assisted);
  CHECK(c.env_params.at("gates") == 3.0);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("colour = 'red'"), ConfigError);
  CHECK_THROWS_AS(parse_config("steps = 'many'"), ConfigError);
  CHECK_THROWS_AS(parse_config("game = "), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);
  RunConfig c;
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.r_p = 60;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.game = "pong";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("bundled configs load") {
  for (const auto* name : {"dot_maze", "brick_wall", "ski_run", "smoke"}) {
    CAPTURE(name);
    const auto c = load_config(data_dir().parent_path() / "configs" / (std::string(name) + ".toml"));
    CHECK_NOTHROW(c.validate());
    if (!c.manual.empty()) CHECK(std::filesystem::exists(c.manual));
  }
}

TEST_CASE("a multi-seed run writes a complete report") {
  testing::TempDir dir;
  auto config = small_run(dir, "run");
  config.plot = true;
  const auto report = run(config);
  CHECK(report.all_ok());
  REQUIRE(report.arms.size() == 2);
  for (const auto& arm : report.arms) {
    CHECK(arm.seeds.size() == 3);
    std::set<std::uint64_t> seeds;
    for (const auto& s : arm.seeds) seeds.insert(s.seed);
    CHECK(seeds == std::set<std::uint64_t>{1, 2, 3});
  }
  for (const auto* f : {"report.json", "context.json", "rewards.json", "plot.svg"}) {
    CHECK(std::filesystem::exists(config.out / f));
  }
  const auto base_csv = testing::slurp(config.out / "baseline" / "seed_1" / "curves.csv");
  CHECK(base_csv.rfind("step,episode,score,aux_sum\n", 0) == 0);
  const auto& baseline = *report.arm("baseline");
  for (const auto& s : baseline.seeds) {
    const auto csv = testing::slurp(config.out / s.curves);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(report.rewards.at("rules").size() == 2);

  const auto back = report_from_json(nlohmann::json::parse(testing::slurp(config.out / "report.json")));
  CHECK(to_json(back) == to_json(report));
}

TEST_CASE("repeated runs write identical curves") {
  testing::TempDir dir;
  auto a = small_run(dir, "a");
  auto b = small_run(dir, "b");
  a.seeds = b.seeds = {7};
  run(a);
  run(b);
  for (const auto* arm : {"baseline", "assisted"}) {
    CHECK(testing::slurp(a.out / arm / "seed_7" / "curves.csv") == testing::slurp(b.out / arm / "seed_7" / "curves.csv"));
  }
}

TEST_CASE("a failing read stage marks every assisted seed") {
  testing::TempDir dir;
  harness::write_text_file(dir / "empty.json", "[]");
  auto config = small_run(dir, "run");
  config.seeds = {1, 2};
  config.provider = "fixture:" + (dir / "empty.json").string();
  const auto report = run(config);
  CHECK_FALSE(report.all_ok());
  CHECK(report.failures.size() == 1);
  for (const auto& s : report.arm("assisted")->seeds) {
    CHECK_FALSE(s.ok);
    CHECK(s.error_kind == "provider");
  }
  for (const auto& s : report.arm("baseline")->seeds) CHECK(s.ok);
  CHECK(std::filesystem::exists(config.out / "report.json"));
}

TEST_CASE("object selection prefers grounded env classes") {
  manual::KeywordRanking r;
  r.entries = {{"ghosts", 1.0}, {"maze", 0.5}};
  CHECK(select_objects({"dot_maze", manual::SourceTag::custom, 10, 256, {}}, r) == std::vector<std::string>{"ghost"});
  CHECK(select_objects({"pacman", manual::SourceTag::custom, 10, 256, {}}, r) ==
        std::vector<std::string>{"ghosts", "maze"});
  CHECK(select_objects({"dot_maze", manual::SourceTag::custom, 10, 256, {"pellet"}}, r) ==
        std::vector<std::string>{"pellet"});
}

TEST_CASE("svg plot has one polyline per series") {
  const std::vector<std::pair<std::string, std::vector<CurvePoint>>> series{
      {"baseline", {{1, 1.0}, {2, 2.0}}}, {"assisted", {{1, 2.0}, {2, 4.0}}}};
  const auto svg = render_svg(series, "dot_maze");
  CHECK(svg.rfind("<svg", 0) == 0);
  size_t lines = 0;
  for (size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++lines;
  CHECK(lines == 2);
}
