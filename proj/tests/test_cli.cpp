#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "readward/harness.hpp"
#include "support.hpp"

using namespace readward;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

std::string quoted(const std::string& s) { return "'" + s + "'"; }

CliResult cli(const std::string& args, const testing::TempDir& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = "cd " + quoted(dir.path().string()) + " && " + quoted(READWARD_CLI) + " --log-level off " +
                          args + " > " + quoted(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::slurp(log)};
}

std::string manual_arg(const std::string& game) { return quoted(harness::default_manual(game).string()); }

std::string fixture(const std::string& name) {
  return quoted("fixture:" + (harness::data_dir() / "fixtures" / name).string());
}

}  // namespace

TEST_CASE("read and reason produce context and reward files") {
  testing::TempDir dir;
  auto r = cli("read --manual " + manual_arg("dot_maze") + " --game dot_maze --out ctx.json", dir);
  REQUIRE(r.code == 0);
  const auto ctx = nlohmann::json::parse(testing::slurp(dir / "ctx.json"));
  CHECK(ctx.at("contexts").size() == 2);

  r = cli("reason --context ctx.json --out rewards.json --rp 5 --rn 5", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("ghost") != std::string::npos);
  const auto rewards = nlohmann::json::parse(testing::slurp(dir / "rewards.json"));
  CHECK(rewards.at("rules").size() == 2);
}

TEST_CASE("pacman fixtures replay through the command line") {
  testing::TempDir dir;
  const auto r = cli("read --manual " + quoted((harness::data_dir() / "manuals" / "pacman_official.txt").string()) +
                         " --game pacman --source official --objects ghost,pellet --provider " +
                         fixture("pacman_official.json") + " --out ctx.json",
                     dir);
  REQUIRE(r.code == 0);
  CHECK(cli("reason --context ctx.json --out rewards.json", dir).code == 0);
}

TEST_CASE("train writes curves, events and frames") {
  testing::TempDir dir;
  CHECK(cli("read --manual " + manual_arg("dot_maze") + " --game dot_maze --out ctx.json", dir).code == 0);
  CHECK(cli("reason --context ctx.json --out rewards.json", dir).code == 0);
  const auto r = cli("train --game dot_maze --delayed --rewards rewards.json --steps 600 --episode-cap 100 "
                     "--out t --log-events t/events.jsonl --dump-frames t/frames",
                     dir);
  REQUIRE(r.code == 0);
  CHECK(testing::slurp(dir / "t/curves.csv").rfind("step,episode,score,aux_sum\n", 0) == 0);
  CHECK(fs::exists(dir / "t/checkpoint.json"));

  std::istringstream events(testing::slurp(dir / "t/events.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(events, line)) {
    const auto e = nlohmann::json::parse(line);
    CHECK(e.contains("object"));
    CHECK(e.contains("aux"));
    ++n;
  }
  CHECK(n > 0);

  int frames = 0;
  for (const auto& f : fs::directory_iterator(dir / "t/frames")) {
    if (frames++ == 0) CHECK(testing::slurp(f.path()).rfind("P5\n", 0) == 0);
  }
  CHECK(frames == 600 + 6);
}

TEST_CASE("run and compare") {
  testing::TempDir dir;
  const auto r = cli("run --game dot_maze --delayed --seeds 1,2 --steps 3000 --out runs/x --plot", dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("baseline") != std::string::npos);
  CHECK(fs::exists(dir / "runs/x/plot.svg"));
  const auto c = cli("compare runs/x/report.json --json", dir);
  REQUIRE(c.code == 0);
  const auto j = nlohmann::json::parse(c.output);
  CHECK(j.at("game") == "dot_maze");
  CHECK(cli("compare runs/x/report.json runs/x/report.json", dir).code == 0);
}

TEST_CASE("exit codes") {
  testing::TempDir dir;
  CHECK(cli("train --game pong --steps 10", dir).code == 2);
  harness::write_text_file(dir / "bad.toml", "colour = 'red'\n");
  CHECK(cli("run --config bad.toml", dir).code == 2);
  CHECK(cli("train --agent sarsa --steps 10", dir).code == 2);
  CHECK(cli("reason --context missing.json", dir).code == 2);

  harness::write_text_file(dir / "empty.json", "[]");
  CHECK(cli("read --manual " + manual_arg("dot_maze") + " --game dot_maze --provider fixture:empty.json", dir).code == 3);
  CHECK(cli("run --game dot_maze --seeds 1 --steps 500 --arms assisted --provider fixture:empty.json --out r", dir)
            .code == 3);
  CHECK(cli("read --manual " + manual_arg("dot_maze") + " --game dot_maze --provider http:http://127.0.0.1:9", dir).code ==
        3);

  harness::write_text_file(dir / "huge.toml", "[env]\npellet_reward = 1e308\n");
  CHECK(cli("train --agent a2c --no-clip --config huge.toml --steps 3000", dir).code == 4);
}
