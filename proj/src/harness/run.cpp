#include <algorithm>
#include <future>

#include "readward/errors.hpp"
#include "readward/harness.hpp"
#include "readward/log.hpp"

namespace readward::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> select_objects(const ReadOptions& options, const manual::KeywordRanking& ranking) {
  if (!options.objects.empty()) return options.objects;
  const auto games = env::game_names();
  if (std::find(games.begin(), games.end(), options.game) != games.end()) {
    env::EnvConfig cfg;
    cfg.game = options.game;
    const auto probe = env::make_env(cfg);
    std::vector<std::string> grounded;
    for (const auto& c : probe->object_classes()) {
      if (manual::grounds_to(c, ranking)) grounded.push_back(c);
    }
    if (grounded.empty()) log::warn("no " + options.game + " object class appears among the manual's keywords");
    return grounded;
  }
  std::vector<std::string> terms;
  for (const auto& [term, _] : ranking.entries) terms.push_back(term);
  return terms;
}

manual::ContextFile read_manual(qa::Provider& provider, std::string_view raw_manual, const ReadOptions& options) {
  manual::ContextFile file;
  file.game = options.game;
  file.source_tag = options.source_tag;
  const auto doc = manual::normalize(raw_manual, options.source_tag);
  file.keywords = manual::tfidf_rank(doc, options.top_k);
  if (file.keywords.short_list) log::warn("manual yields fewer than " + std::to_string(options.top_k) + " keywords");

  const auto generic = manual::ask_generic(provider, doc, options.max_tokens);
  for (const auto& object : select_objects(options, file.keywords)) {
    const manual::QAPair object_pair{manual::object_question(object),
                                     manual::extract(provider, doc, manual::object_question(object), options.max_tokens)
                                         .answer};
    try {
      file.contexts.push_back(manual::assemble_context(object, generic, object_pair));
    } catch (const EmptyContextError&) {
      log::warn("manual says nothing usable about '" + object + "'; skipped");
    }
  }
  return file;
}

namespace {

std::string error_kind(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return "config";
  } catch (const PreconditionError&) {
    return "config";
  } catch (const ProviderError&) {
    return "provider";
  } catch (const DivergenceError&) {
    return "divergence";
  } catch (...) {
    return "other";
  }
}

std::string error_message(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

struct ArmOutcome {
  SeedResult result;
  std::vector<CurvePoint> curve;
};

ArmOutcome train_arm(const RunConfig& config, const std::string& arm, std::uint64_t seed,
                     const reason::RewardTable* table) {
  env::EnvConfig ec;
  ec.game = config.game;
  ec.seed = seed;
  ec.episode_cap = config.episode_cap;
  ec.delayed = config.delayed;
  ec.params = config.env_params;
  auto env = env::make_env(ec);

  agents::TrainOptions opts;
  opts.agent = config.agent;
  opts.steps = config.steps;
  opts.seed = seed;
  opts.clip_rewards = config.clip_rewards;
  opts.noise = config.noise;
  const auto trained = agents::train(*env, table, opts);

  ArmOutcome o;
  o.result.seed = seed;
  o.result.ok = true;
  o.result.episodes = static_cast<int>(std::count_if(trained.episodes.begin(), trained.episodes.end(),
                                                     [](const EpisodeTrace& e) { return e.complete; }));
  o.result.final_score = final_score(trained.episodes, config.window);
  if (o.result.episodes >= 2 * config.window) o.result.correlation = correlation(trained.episodes, config.window);

  const fs::path rel = fs::path(arm) / ("seed_" + std::to_string(seed));
  write_text_file(config.out / rel / "curves.csv", curves_csv(trained.episodes));
  write_text_file(config.out / rel / "checkpoint.json", trained.checkpoint.dump(1) + "\n");
  o.result.curves = (rel / "curves.csv").generic_string();
  o.curve = learning_curve(trained.episodes, config.steps, config.window);
  return o;
}

}  // namespace

RunReport run(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.out);

  RunReport report;
  report.config = config.to_json();
  report.game = config.game;
  report.agent = agents::to_string(config.agent);
  report.steps = config.steps;
  report.window = config.window;

  std::optional<reason::RewardTable> table;
  std::exception_ptr assist_failure;
  const bool want_assisted = config.arms != Arms::baseline;
  if (want_assisted) {
    try {
      const auto manual_path = config.manual.empty() ? default_manual(config.game) : config.manual;
      auto provider = qa::make_provider(config.provider);
      ReadOptions ro{config.game, config.source_tag, config.top_k, config.max_tokens, config.objects};
      const auto context = read_manual(*provider, read_text_file(manual_path), ro);
      write_text_file(config.out / "context.json", manual::to_json(context).dump(2) + "\n");
      table = reason::build_table(*provider, context.contexts, config.r_p, config.r_n);
      write_text_file(config.out / "rewards.json", reason::to_json(*table).dump(2) + "\n");
      report.rewards = reason::to_json(*table);
    } catch (...) {
      assist_failure = std::current_exception();
      report.failures.push_back("read/reason: " + error_message(assist_failure));
      log::error("read/reason stage failed: " + error_message(assist_failure));
    }
  }

  std::vector<std::string> arm_names;
  if (config.arms != Arms::assisted) arm_names.push_back("baseline");
  if (want_assisted) arm_names.push_back("assisted");

  struct Job {
    std::string arm;
    std::uint64_t seed;
    std::future<ArmOutcome> future;
  };
  std::vector<Job> jobs;
  for (const auto& arm : arm_names) {
    for (const auto seed : config.seeds) {
      const reason::RewardTable* t = arm == "assisted" ? &*table : nullptr;
      if (arm == "assisted" && !table) {
        std::promise<ArmOutcome> failed;
        failed.set_exception(assist_failure);
        jobs.push_back({arm, seed, failed.get_future()});
        continue;
      }
      jobs.push_back({arm, seed, std::async(std::launch::async, train_arm, std::cref(config), arm, seed, t)});
    }
  }

  for (const auto& arm : arm_names) {
    ArmReport ar;
    ar.arm = arm;
    std::vector<std::vector<CurvePoint>> curves;
    for (auto& job : jobs) {
      if (job.arm != arm) continue;
      try {
        auto o = job.future.get();
        ar.seeds.push_back(o.result);
        curves.push_back(std::move(o.curve));
      } catch (...) {
        const auto e = std::current_exception();
        SeedResult s;
        s.seed = job.seed;
        s.error = error_message(e);
        s.error_kind = error_kind(e);
        log::error(arm + " seed " + std::to_string(job.seed) + " failed: " + s.error);
        ar.seeds.push_back(std::move(s));
      }
    }
    ar.summarise();
    ar.curve = mean_curve(curves);
    report.arms.push_back(std::move(ar));
  }

  write_text_file(config.out / "report.json", to_json(report).dump(2) + "\n");
  if (config.plot) {
    std::vector<std::pair<std::string, std::vector<CurvePoint>>> series;
    for (const auto& a : report.arms) series.emplace_back(a.arm, a.curve);
    write_text_file(config.out / "plot.svg",
                    render_svg(series, config.game + " / " + agents::to_string(config.agent)));
  }
  return report;
}

}  // namespace readward::harness
