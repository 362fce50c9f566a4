// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: readward_acceptance [--only N] [--work DIR]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "readward/agents.hpp"
#include "readward/env.hpp"
#include "readward/harness.hpp"
#include "readward/interact.hpp"
#include "readward/log.hpp"
#include "readward/manual.hpp"
#include "readward/qa_provider.hpp"
#include "readward/reason.hpp"

using namespace readward;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Shared settings of the delayed dot_maze experiment.
constexpr int kSeeds = 5;
constexpr long kSteps = 200000;
constexpr int kCap = 1000;
constexpr int kWindow = 50;

reason::RewardTable desk_table(const std::string& game, double scale) {
  qa::LexicalProvider provider;
  harness::ReadOptions ro{game};
  const auto ctx = harness::read_manual(provider, harness::read_text_file(harness::default_manual(game)), ro);
  return reason::build_table(provider, ctx.contexts, scale, scale);
}

agents::TrainResult train(const std::string& game, agents::AgentKind kind, std::uint64_t seed,
                          const reason::RewardTable* table) {
  env::EnvConfig ec;
  ec.game = game;
  ec.seed = seed;
  ec.episode_cap = kCap;
  ec.delayed = true;
  auto e = env::make_env(ec);
  agents::TrainOptions o;
  o.agent = kind;
  o.steps = kSteps;
  o.seed = seed;
  return agents::train(*e, table, o);
}

// ---------------------------------------------------------------------------

Outcome pipeline_oracle() {
  const auto start = std::chrono::steady_clock::now();
  auto fixture = qa::FixtureProvider::load(harness::data_dir() / "fixtures" / "pacman_official.json");
  harness::ReadOptions ro{"pacman", manual::SourceTag::official};
  ro.objects = {"ghost", "pellet"};
  const auto ctx = harness::read_manual(
      fixture, harness::read_text_file(harness::data_dir() / "manuals" / "pacman_official.txt"), ro);

  const std::string objective =
      "To score as many points as you can practice clearing the maze of dots before trying to gobble up the ghosts";
  const manual::ContextBundle* ghost = nullptr;
  for (const auto& b : ctx.contexts) {
    if (b.object == "ghost") ghost = &b;
  }
  if (!ghost) return {false, "no ghost context bundle"};
  const bool has_ghosts = ghost->rendered.find("Ghosts") != std::string::npos;
  const bool has_objective =
      ghost->rendered.find("Question: What is the objective of the game? Answer: " + objective + ".") !=
      std::string::npos;

  qa::LexicalProvider reasoner;
  const auto table = reason::build_table(reasoner, ctx.contexts, 5.0, 5.0);
  const auto& rules = table.rules();
  const bool ghost_ok = rules.contains("ghost") && rules.at("ghost").verdict == reason::Verdict::No &&
                        rules.at("ghost").reward == -5.0;
  const bool pellet_ok = rules.contains("pellet") && rules.at("pellet").verdict == reason::Verdict::Yes &&
                         rules.at("pellet").reward == 5.0;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {has_ghosts && has_objective && ghost_ok && pellet_ok && secs < 1.0,
          fmt("Ghosts in context %s, objective %s, ghost %s, pellet %s, %.3f s", has_ghosts ? "yes" : "no",
              has_objective ? "yes" : "no", ghost_ok ? "No/-5" : "wrong", pellet_ok ? "Yes/+5" : "wrong", secs)};
}

// Results of the delayed dot_maze experiment, shared by criteria 2, 3 and 4.
struct Experiment {
  std::vector<double> random, baseline;
  std::map<double, std::vector<agents::TrainResult>> assisted;  // by reward scale
  std::vector<agents::TrainResult> baseline_runs;
};

Experiment& experiment() {
  static Experiment ex = [] {
    Experiment e;
    std::map<double, reason::RewardTable> tables;
    for (double s : {2.0, 5.0, 50.0}) tables.emplace(s, desk_table("dot_maze", s));
    for (int seed = 1; seed <= kSeeds; ++seed) {
      e.random.push_back(
          harness::final_score(train("dot_maze", agents::AgentKind::random, seed, nullptr).episodes, kWindow));
      e.baseline_runs.push_back(train("dot_maze", agents::AgentKind::q, seed, nullptr));
      e.baseline.push_back(harness::final_score(e.baseline_runs.back().episodes, kWindow));
      for (auto& [s, t] : tables) e.assisted[s].push_back(train("dot_maze", agents::AgentKind::q, seed, &t));
    }
    return e;
  }();
  return ex;
}

std::vector<double> finals(const std::vector<agents::TrainResult>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(harness::final_score(r.episodes, kWindow));
  return v;
}

std::string list(std::span<const double> v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.1f", x);
  return s;
}

Outcome delayed_rescue() {
  const auto t0 = std::chrono::steady_clock::now();
  auto& ex = experiment();
  const auto assisted = finals(ex.assisted.at(5.0));
  const double m_rand = mean(ex.random), m_base = mean(ex.baseline), m_assist = mean(assisted);
  int wins = 0;
  for (int i = 0; i < kSeeds; ++i) wins += assisted[i] > ex.baseline[i] ? 1 : 0;
  const bool near_random = std::abs(m_base - m_rand) <= 0.1 * std::abs(m_rand);
  const bool ratio = m_assist >= 1.5 * m_base;
  const bool paired = wins >= 4;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {near_random && ratio && paired,
          fmt("random %.2f, baseline %.2f (%+.0f%% vs random, need within 10%%), assisted %.2f (%.2fx, need 1.5x), "
              "paired wins %d/5; baseline [%s] assisted [%s]; %.0f s for 25 runs",
              m_rand, m_base, 100.0 * (m_base - m_rand) / std::abs(m_rand), m_assist, m_assist / m_base, wins,
              list(ex.baseline).c_str(), list(assisted).c_str(), secs)};
}

Outcome correlation_property() {
  auto& ex = experiment();
  std::vector<double> rs;
  bool aux_zero = true;
  auto check_baseline = [&](const agents::TrainResult& r) {
    for (const auto& e : r.episodes) aux_zero = aux_zero && e.aux_sum() == 0.0;
  };
  for (int i = 0; i < 3; ++i) {
    rs.push_back(harness::correlation(ex.assisted.at(5.0)[i].episodes, kWindow).value_or(NAN));
    check_baseline(ex.baseline_runs[i]);
  }
  const auto bricks = desk_table("brick_wall", 5.0);
  for (int seed = 1; seed <= 3; ++seed) {
    rs.push_back(harness::correlation(train("brick_wall", agents::AgentKind::q, seed, &bricks).episodes, kWindow)
                     .value_or(NAN));
    check_baseline(train("brick_wall", agents::AgentKind::q, seed, nullptr));
  }
  const bool strong = std::all_of(rs.begin(), rs.end(), [](double r) { return r > 0.3; });
  return {strong && aux_zero, fmt("r dot_maze [%.2f %.2f %.2f] brick_wall [%.2f %.2f %.2f] (need > 0.3); baseline aux %s",
                                  rs[0], rs[1], rs[2], rs[3], rs[4], rs[5], aux_zero ? "all zero" : "NONZERO")};
}

Outcome scale_robustness() {
  auto& ex = experiment();
  // Clipping removes the scale exactly when every step either has no aux reward
  // or has aux of magnitude >= 1 with no env reward. Runs at different scales
  // stay in lockstep until the first step outside that condition.
  auto scale_free = [](const StepRecord& s) {
    return s.aux_reward == 0.0 || (s.env_reward == 0.0 && std::abs(s.aux_reward) >= 1.0);
  };
  long compared = 0, events = 0, total = 0, mismatched = 0;
  for (int i = 0; i < kSeeds; ++i) {
    const std::array runs{&ex.assisted.at(2.0)[i].episodes, &ex.assisted.at(5.0)[i].episodes,
                          &ex.assisted.at(50.0)[i].episodes};
    for (const auto& e : *runs[0]) total += static_cast<long>(e.steps.size());
    bool lockstep = true;
    for (size_t e = 0; lockstep && e < runs[0]->size(); ++e) {
      for (size_t k = 0; lockstep && k < (*runs[0])[e].steps.size(); ++k) {
        const auto& base = (*runs[0])[e].steps[k];
        bool same = true;
        for (const auto* r : runs) {
          const auto& s = r->at(e).steps.at(k);
          same = same && s.action == base.action && s.total_reward == base.total_reward;
        }
        if (!std::all_of(runs.begin(), runs.end(), [&](const auto* r) { return scale_free(r->at(e).steps.at(k)); })) {
          lockstep = false;
          break;
        }
        ++compared;
        events += base.aux_reward != 0.0 ? 1 : 0;
        mismatched += same ? 0 : 1;
      }
    }
  }
  // Per step over every recorded run: the clipped total at the other scales.
  long qualifying = 0, rescaled_diffs = 0;
  for (const auto& [scale, runs] : ex.assisted) {
    for (const auto& run : runs) {
      for (const auto& e : run.episodes) {
        for (const auto& s : e.steps) {
          if (!scale_free(s)) continue;
          ++qualifying;
          for (double other : {2.0, 5.0, 50.0}) {
            rescaled_diffs += agents::clip_reward(s.env_reward + s.aux_reward * other / scale) != s.total_reward;
          }
        }
      }
    }
  }
  const auto f2 = finals(ex.assisted.at(2.0)), f5 = finals(ex.assisted.at(5.0)), f50 = finals(ex.assisted.at(50.0));
  const double m2 = mean(f2), m5 = mean(f5), m50 = mean(f50);
  const double lo = std::min({m2, m5, m50}), hi = std::max({m2, m5, m50});
  const bool within = lo > 0.0 && (hi - lo) / lo <= 0.15;
  return {mismatched == 0 && events > 0 && rescaled_diffs == 0 && within,
          fmt("%ld of %ld steps in lockstep under the clipping conditions (%ld with aux), %ld differing; "
              "%ld qualifying steps rescaled, %ld differing; assisted means 2: %.2f, 5: %.2f, 50: %.2f "
              "(spread %.1f%%, need <= 15%%)",
              compared, total, events, mismatched, qualifying, rescaled_diffs, m2, m5, m50, lo > 0.0 ? 100.0 * (hi - lo) / lo : INFINITY)};
}

Outcome delayed_equivalence() {
  long episodes = 0, mismatches = 0;
  for (const auto& game : env::game_names()) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
      env::EnvConfig c;
      c.game = game;
      c.seed = seed;
      auto native = env::make_env(c);
      c.delayed = true;
      auto delayed = env::make_env(c);
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> act(0, native->num_actions() - 1);
      native->reset();
      delayed->reset();
      double sum_native = 0.0, sum_delayed = 0.0;
      for (bool done = false; !done;) {
        const int a = act(rng);
        const auto n = native->step(a);
        const auto d = delayed->step(a);
        sum_native += n.reward;
        sum_delayed += d.reward;
        done = n.terminal;
        if (n.terminal != d.terminal) ++mismatches;
      }
      ++episodes;
      if (sum_native != sum_delayed) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%ld episodes over 3 games, %ld mismatches", episodes, mismatches)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, testing::a2c_gradient_check(rng).relative_error);
  return {worst < 1e-4, fmt("100 instances, max relative error %.2e (need < 1e-4)", worst)};
}

Outcome tracker_recovery() {
  const std::vector<std::string> classes{"ghost", "pellet"};
  interact::NoiseModel noise;
  noise.flip_prob = 0.2;
  int recovered = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    noise.seed = 7000 + trial;
    const env::GameObject obj{1, classes[trial % 2], {trial % 30, 5, trial % 30 + 1, 6}, false};
    interact::TrackerState state;
    for (int step = 0; step < 50; ++step) {
      const auto dets = interact::corrupt(std::span(&obj, 1), noise, step, classes);
      state = interact::track_update(std::move(state), dets);
    }
    recovered += state.tracks.size() == 1 && state.tracks[0].dominant_class() == obj.class_name ? 1 : 0;
  }

  // Noise-free: events through the tracker equal events from ground truth.
  long frames = 0, diffs = 0;
  for (const auto& game : env::game_names()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      env::EnvConfig c;
      c.game = game;
      c.seed = seed;
      c.episode_cap = 500;
      auto e = env::make_env(c);
      interact::InteractionMonitor truth(e->agent_class(), e->object_classes());
      interact::InteractionMonitor tracked(e->agent_class(), e->object_classes(), interact::NoiseModel{});
      truth.reset();
      tracked.reset();
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> act(0, e->num_actions() - 1);
      auto r = e->reset();
      for (;;) {
        auto a = truth.observe(r);
        auto b = tracked.observe(r);
        ++frames;
        auto key = [](std::vector<interact::InteractionEvent>& v) {
          std::vector<std::pair<int, std::string>> k;
          for (const auto& x : v) k.emplace_back(x.step, x.object_class);
          std::sort(k.begin(), k.end());
          return k;
        };
        if (key(a) != key(b)) ++diffs;
        if (r.terminal) break;
        r = e->step(act(rng));
      }
    }
  }
  return {recovered >= 990 && diffs == 0,
          fmt("%d/1000 tracks recovered (need >= 990); noise-free: %ld frames, %ld event differences", recovered,
              frames, diffs)};
}

Outcome debounce_property() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> length(1, 60);
  std::uniform_real_distribution<double> density(0.05, 0.95);
  const env::BBox object{10, 10, 11, 11}, touching{11, 11, 12, 12}, apart{20, 20, 21, 21};
  int failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::bernoulli_distribution touch(density(rng));
    interact::ContactState state;
    interact::Track tr;
    tr.track_id = 3;
    tr.box = object;
    tr.class_votes = {{"pellet", 1}};
    const std::vector<interact::Track> tracks{tr};
    std::vector<bool> contact;
    int events = 0;
    const int n = length(rng);
    for (int t = 0; t < n; ++t) {
      contact.push_back(touch(rng));
      auto [ev, next] = interact::detect_events(contact.back() ? touching : apart, tracks, state, t);
      events += static_cast<int>(ev.size());
      state = std::move(next);
    }
    if (events != testing::rising_edges(contact)) ++failures;
  }
  return {failures == 0, fmt("10000 sequences, %d mismatches", failures)};
}

Outcome speedup_reporting() {
  auto report = [](double level, long reach) {
    harness::RunReport r;
    r.game = "dot_maze";
    r.steps = 1'000'000;
    harness::ArmReport a;
    a.arm = "assisted";
    a.mean = level;
    for (int i = 1; i <= 40; ++i) {
      const long step = 25'000L * i;
      a.curve.push_back({step, step >= reach ? level : level * static_cast<double>(step) / (2.0 * reach)});
    }
    r.arms.push_back(a);
    // Through the serialised form, as the command line sees it.
    return harness::report_from_json(harness::to_json(r));
  };
  const auto c = harness::compare(report(452.0, 1'000'000), report(580.0, 500'000));
  const bool ok = c.speedup && std::abs(*c.speedup - 2.0) < 1e-12;
  return {ok, fmt("baseline reaches its final level at %ld steps, assisted at %ld; speed-up %.3f (need 2.0)", c.step_a,
                  c.step_b.value_or(-1), c.speedup.value_or(NAN))};
}

Outcome determinism(const fs::path& work) {
  auto config = harness::load_config(harness::data_dir().parent_path() / "configs" / "smoke.toml");
  config.plot = false;
  config.out = work / "determinism_a";
  harness::run(config);
  config.out = work / "determinism_b";
  harness::run(config);
  int files = 0, differ = 0;
  for (const auto& arm : {"baseline", "assisted"}) {
    for (const auto seed : config.seeds) {
      const auto rel = fs::path(arm) / ("seed_" + std::to_string(seed)) / "curves.csv";
      ++files;
      if (harness::read_text_file(work / "determinism_a" / rel) != harness::read_text_file(work / "determinism_b" / rel))
        ++differ;
    }
  }
  return {differ == 0, fmt("%d curves.csv pairs compared, %d differ", files, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"readward acceptance suite"};
  int only = 0;
  std::string work = (fs::temp_directory_path() / "readward_acceptance").string();
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--work", work, "Scratch directory for run outputs");
  CLI11_PARSE(app, argc, argv);
  log::set_level(log::Level::off);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pipeline oracle on the Pacman fixtures", pipeline_oracle},
      {"delayed-reward rescue on dot_maze", delayed_rescue},
      {"aux/score correlation", correlation_property},
      {"reward-scale robustness", scale_robustness},
      {"delayed-wrapper equivalence", delayed_equivalence},
      {"A2C gradient check", gradient_check},
      {"tracker recovery", tracker_recovery},
      {"debounce property", debounce_property},
      {"speed-up reporting", speedup_reporting},
      {"determinism", [&] { return determinism(work); }},
  };

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
