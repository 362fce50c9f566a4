// readward command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "readward/agents.hpp"
#include "readward/errors.hpp"
#include "readward/harness.hpp"
#include "readward/log.hpp"

namespace fs = std::filesystem;
using namespace readward;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;
constexpr int kExitDivergence = 4;

int exit_code_for(const std::string& kind) {
  if (kind == "config") return kExitConfig;
  if (kind == "provider") return kExitProvider;
  if (kind == "divergence") return kExitDivergence;
  return 1;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    try {
      size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--seeds needs at least one seed");
  return out;
}

json load_json(const fs::path& path) {
  try {
    return json::parse(harness::read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_pgm(const fs::path& path, const env::Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
}

struct ReadArgs {
  std::string manual;
  std::string game;
  int k = manual::kDefaultTopK;
  int max_tokens = manual::kDefaultMaxTokens;
  std::string source = "custom";
  std::string objects;
  std::string provider = "lexical";
  std::string record;
  std::string out = "context.json";
};

int cmd_read(const ReadArgs& a) {
  auto provider = qa::make_provider(a.provider);
  std::shared_ptr<qa::RecordingProvider> recorder;
  if (!a.record.empty()) {
    recorder = std::make_shared<qa::RecordingProvider>(provider);
    provider = recorder;
  }
  harness::ReadOptions ro{a.game, manual::parse_source_tag(a.source), a.k, a.max_tokens, split_list(a.objects)};
  const auto file = harness::read_manual(*provider, harness::read_text_file(a.manual), ro);
  harness::write_text_file(a.out, manual::to_json(file).dump(2) + "\n");
  if (recorder) recorder->save(a.record);
  std::cout << "wrote " << file.contexts.size() << " context bundle(s) to " << a.out << "\n";
  return 0;
}

struct ReasonArgs {
  std::string context;
  std::string provider = "lexical";
  double rp = reason::kDefaultReward;
  double rn = reason::kDefaultReward;
  std::string cache;
  std::string record;
  std::string out = "rewards.json";
};

int cmd_reason(const ReasonArgs& a) {
  const auto file = manual::context_file_from_json(load_json(a.context));
  auto provider = qa::make_provider(a.provider);
  std::shared_ptr<qa::RecordingProvider> recorder;
  if (!a.record.empty()) {
    recorder = std::make_shared<qa::RecordingProvider>(provider);
    provider = recorder;
  }
  std::optional<reason::DecisionCache> cache;
  if (!a.cache.empty()) cache.emplace(a.cache);
  const auto table = reason::build_table(*provider, file.contexts, a.rp, a.rn, cache ? &*cache : nullptr);
  if (cache) cache->save();
  if (recorder) recorder->save(a.record);
  harness::write_text_file(a.out, reason::to_json(table).dump(2) + "\n");
  for (const auto& [object, rule] : table.rules()) {
    std::printf("%-12s %-8s %+g\n", object.c_str(), reason::to_string(rule.verdict).c_str(), rule.reward);
  }
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string game = "dot_maze";
  std::string agent = "q";
  bool delayed = false;
  std::string rewards;
  long steps = 200000;
  std::uint64_t seed = 1;
  int episode_cap = 1000;
  std::string noise;
  bool no_clip = false;
  std::string out = "train";
  std::string log_events;
  std::string dump_frames;
};

int cmd_train(const TrainArgs& a) {
  env::EnvConfig ec;
  ec.game = a.game;
  ec.seed = a.seed;
  ec.episode_cap = a.episode_cap;
  ec.delayed = a.delayed;
  if (!a.config.empty()) {
    const auto rc = harness::load_config(a.config);
    ec.params = rc.env_params;
  }
  auto env = env::make_env(ec);

  std::optional<reason::RewardTable> table;
  if (!a.rewards.empty()) table = reason::table_from_json(load_json(a.rewards));

  agents::TrainOptions opts;
  opts.agent = agents::parse_agent(a.agent);
  opts.steps = a.steps;
  opts.seed = a.seed;
  opts.clip_rewards = !a.no_clip;
  if (!a.noise.empty()) opts.noise = interact::NoiseModel::parse(a.noise);

  std::ofstream events;
  agents::TrainHooks hooks;
  if (!a.log_events.empty()) {
    if (fs::path(a.log_events).has_parent_path()) fs::create_directories(fs::path(a.log_events).parent_path());
    events.open(a.log_events);
    if (!events) throw ConfigError("cannot write " + a.log_events);
    hooks.on_event = [&](int episode, const interact::InteractionEvent& e, double aux) {
      events << json{{"episode", episode}, {"step", e.step}, {"object", e.object_class}, {"track_id", e.track_id},
                     {"aux", aux}}
                    .dump()
             << "\n";
    };
  }
  if (!a.dump_frames.empty()) {
    fs::create_directories(a.dump_frames);
    hooks.on_frame = [&](int episode, const env::StepResult& r) {
      char name[64];
      std::snprintf(name, sizeof name, "ep%04d_step%04d.pgm", episode, r.step);
      write_pgm(fs::path(a.dump_frames) / name, r.frame);
    };
  }

  const auto result = agents::train(*env, table ? &*table : nullptr, opts, hooks);
  harness::write_text_file(fs::path(a.out) / "curves.csv", harness::curves_csv(result.episodes));
  harness::write_text_file(fs::path(a.out) / "checkpoint.json", result.checkpoint.dump(1) + "\n");
  const int done = static_cast<int>(std::count_if(result.episodes.begin(), result.episodes.end(),
                                                  [](const EpisodeTrace& e) { return e.complete; }));
  std::cout << done << " complete episode(s)";
  if (done > 0) std::cout << ", final mean score " << harness::final_score(result.episodes, 50);
  std::cout << "\n";
  return 0;
}

int cmd_run(harness::RunConfig config) {
  const auto report = harness::run(config);
  for (const auto& arm : report.arms) {
    std::printf("%-9s mean %.2f +- %.2f over %zu seed(s)\n", arm.arm.c_str(), arm.mean, arm.std, arm.seeds.size());
  }
  if (report.arm("baseline") && report.arm("assisted")) {
    std::cout << harness::format_comparison(harness::compare(report), "baseline", "assisted");
  }
  std::cout << "report: " << (config.out / "report.json").string() << "\n";
  if (!report.failures.empty() || !report.all_ok()) {
    for (const auto& arm : report.arms) {
      for (const auto& s : arm.seeds) {
        if (!s.ok) return exit_code_for(s.error_kind);
      }
    }
    return kExitConfig;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& reports, bool as_json) {
  harness::Comparison c;
  std::string la = "baseline", lb = "assisted";
  if (reports.size() == 1) {
    c = harness::compare(harness::report_from_json(load_json(reports[0])));
  } else if (reports.size() == 2) {
    c = harness::compare(harness::report_from_json(load_json(reports[0])),
                         harness::report_from_json(load_json(reports[1])));
    la = "report A";
    lb = "report B";
  } else {
    throw ConfigError("compare takes one or two report files");
  }
  if (as_json) {
    json j = {{"game", c.game},     {"mean_a", c.mean_a}, {"mean_b", c.mean_b},
              {"std_a", c.std_a},   {"std_b", c.std_b},   {"step_a", c.step_a}};
    j["improvement_pct"] = c.improvement_pct ? json(*c.improvement_pct) : json(nullptr);
    j["speedup"] = c.speedup ? json(*c.speedup) : json(nullptr);
    j["step_b"] = c.step_b ? json(*c.step_b) : json(nullptr);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << harness::format_comparison(c, la, lb);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"readward: manual-derived auxiliary rewards for reinforcement learning"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  ReadArgs ra;
  auto* read = app.add_subcommand("read", "Extract per-object context bundles from a manual");
  read->add_option("--manual", ra.manual, "Manual text or HTML file")->required();
  read->add_option("--game", ra.game, "Game name")->required();
  read->add_option("--k", ra.k, "Keywords to keep")->check(CLI::PositiveNumber);
  read->add_option("--max-tokens", ra.max_tokens, "Words per QA chunk");
  read->add_option("--source", ra.source, "official, wiki or custom");
  read->add_option("--objects", ra.objects, "Comma-separated objects, overriding keyword selection");
  read->add_option("--provider", ra.provider, "lexical, fixture:<path> or http:<url>");
  read->add_option("--record", ra.record, "Record provider answers to a fixture file");
  read->add_option("--out", ra.out, "Output context.json");

  ReasonArgs rs;
  auto* reason_cmd = app.add_subcommand("reason", "Turn context bundles into a reward table");
  reason_cmd->add_option("--context", rs.context, "context.json from `read`")->required();
  reason_cmd->add_option("--provider", rs.provider, "lexical, fixture:<path> or http:<url>");
  reason_cmd->add_option("--rp", rs.rp, "Reward for a Yes verdict");
  reason_cmd->add_option("--rn", rs.rn, "Penalty magnitude for a No verdict");
  reason_cmd->add_option("--cache", rs.cache, "Decision cache file");
  reason_cmd->add_option("--record", rs.record, "Record provider scores to a fixture file");
  reason_cmd->add_option("--out", rs.out, "Output rewards.json");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one agent on one game");
  train->add_option("--config", ta.config, "TOML file supplying [env] parameters");
  train->add_option("--game", ta.game, "ski_run, dot_maze or brick_wall");
  train->add_option("--agent", ta.agent, "q, a2c or random");
  train->add_flag("--delayed", ta.delayed, "Pay the episode reward only at the end");
  train->add_option("--rewards", ta.rewards, "rewards.json; omit for the baseline");
  train->add_option("--steps", ta.steps, "Environment steps")->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "Random seed");
  train->add_option("--episode-cap", ta.episode_cap, "Maximum steps per episode")->check(CLI::PositiveNumber);
  train->add_option("--noise", ta.noise, "Detector noise, e.g. miss=0.1,flip=0.2,merge=2");
  train->add_flag("--no-clip", ta.no_clip, "Do not clip the total reward to [-1, 1]");
  train->add_option("--out", ta.out, "Output directory");
  train->add_option("--log-events", ta.log_events, "Write interaction events as JSON lines");
  train->add_option("--dump-frames", ta.dump_frames, "Write every frame as PGM into this directory");

  std::string config_path, game, agent, manual_path, provider, seeds, noise, out, arms;
  long steps = 0;
  double rp = 0, rn = 0;
  bool delayed = false, plot = false;
  auto* run = app.add_subcommand("run", "Baseline and assisted arms over several seeds");
  run->add_option("--config", config_path, "TOML run configuration");
  auto* o_game = run->add_option("--game", game, "ski_run, dot_maze or brick_wall");
  auto* o_agent = run->add_option("--agent", agent, "q, a2c or random");
  auto* o_delayed = run->add_flag("--delayed", delayed, "Delayed reward schedule");
  auto* o_manual = run->add_option("--manual", manual_path, "Manual file");
  auto* o_provider = run->add_option("--provider", provider, "QA provider spec");
  auto* o_seeds = run->add_option("--seeds", seeds, "Comma-separated seeds");
  auto* o_steps = run->add_option("--steps", steps, "Steps per seed and arm");
  auto* o_noise = run->add_option("--noise", noise, "Detector noise model");
  auto* o_out = run->add_option("--out", out, "Output directory");
  auto* o_plot = run->add_flag("--plot", plot, "Write plot.svg");
  auto* o_rp = run->add_option("--rp", rp, "Reward for a Yes verdict");
  auto* o_rn = run->add_option("--rn", rn, "Penalty magnitude for a No verdict");
  auto* o_arms = run->add_option("--arms", arms, "both, baseline or assisted");

  std::vector<std::string> reports;
  bool compare_json = false;
  auto* compare = app.add_subcommand("compare", "Compare run reports");
  compare->add_option("reports", reports, "report.json (baseline vs assisted) or two reports")->required();
  compare->add_flag("--json", compare_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::map<std::string, log::Level> levels{{"debug", log::Level::debug},
                                                 {"info", log::Level::info},
                                                 {"warn", log::Level::warn},
                                                 {"error", log::Level::error},
                                                 {"off", log::Level::off}};
  log::set_level(levels.at(log_level));

  try {
    if (*read) return cmd_read(ra);
    if (*reason_cmd) return cmd_reason(rs);
    if (*train) return cmd_train(ta);
    if (*compare) return cmd_compare(reports, compare_json);
    if (*run) {
      harness::RunConfig c = config_path.empty() ? harness::RunConfig{} : harness::load_config(config_path);
      if (o_game->count()) c.game = game;
      if (o_agent->count()) c.agent = agents::parse_agent(agent);
      if (o_delayed->count()) c.delayed = delayed;
      if (o_manual->count()) c.manual = manual_path;
      if (o_provider->count()) c.provider = provider;
      if (o_seeds->count()) c.seeds = parse_seeds(seeds);
      if (o_steps->count()) c.steps = steps;
      if (o_noise->count()) c.noise = noise.empty() || noise == "none" ? std::nullopt
                                                                        : std::optional(interact::NoiseModel::parse(noise));
      if (o_out->count()) c.out = out;
      if (o_plot->count()) c.plot = plot;
      if (o_rp->count()) c.r_p = rp;
      if (o_rn->count()) c.r_n = rn;
      if (o_arms->count()) c.arms = harness::parse_arms(arms);
      return cmd_run(std::move(c));
    }
  } catch (const ConfigError& e) {
    log::error(e.what());
    return kExitConfig;
  } catch (const PreconditionError& e) {
    log::error(e.what());
    return kExitConfig;
  } catch (const ProviderError& e) {
    log::error(e.what());
    return kExitProvider;
  } catch (const DivergenceError& e) {
    log::error(e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
  return 0;
}
