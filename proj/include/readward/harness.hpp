#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "readward/agents.hpp"
#include "readward/interact.hpp"
#include "readward/manual.hpp"
#include "readward/reason.hpp"
#include "readward/trace.hpp"

namespace readward::harness {

enum class Arms { both, baseline, assisted };

std::string to_string(Arms arms);
Arms parse_arms(const std::string& s);

struct RunConfig {
  std::string game = "dot_maze";
  agents::AgentKind agent = agents::AgentKind::q;
  bool delayed = true;
  /// Empty selects the bundled manual for the game.
  std::filesystem::path manual;
  manual::SourceTag source_tag = manual::SourceTag::custom;
  std::string provider = "lexical";
  std::optional<interact::NoiseModel> noise;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  long steps = 200000;
  double r_p = reason::kDefaultReward;
  double r_n = reason::kDefaultReward;
  std::filesystem::path out = "run";
  bool plot = false;
  Arms arms = Arms::both;
  int episode_cap = 1000;
  /// Episodes per correlation window and per final-score average.
  int window = 50;
  int top_k = manual::kDefaultTopK;
  int max_tokens = manual::kDefaultMaxTokens;
  bool clip_rewards = true;
  /// Objects to reason about; empty derives them from the manual.
  std::vector<std::string> objects;
  std::map<std::string, double> env_params;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Parses TOML text. Relative paths resolve against `base_dir`.
RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Directory holding the bundled manuals and fixtures.
std::filesystem::path data_dir();
std::filesystem::path default_manual(const std::string& game);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

struct ReadOptions {
  std::string game;
  manual::SourceTag source_tag = manual::SourceTag::custom;
  int top_k = manual::kDefaultTopK;
  int max_tokens = manual::kDefaultMaxTokens;
  std::vector<std::string> objects;
};

/// Objects to question: the explicit list, else a desk game's classes that
/// ground to a ranked keyword, else the ranked keywords themselves.
std::vector<std::string> select_objects(const ReadOptions& options, const manual::KeywordRanking& ranking);

/// Normalise, rank, question and assemble a context bundle per object. Objects
/// whose every answer is empty are skipped with a warning.
manual::ContextFile read_manual(qa::Provider& provider, std::string_view raw_manual, const ReadOptions& options);

/// Mean score of the last `window` complete episodes (fewer if fewer exist).
double final_score(std::span<const EpisodeTrace> episodes, int window);

/// Pearson r over consecutive windows of complete episodes, pairing each
/// window's summed aux reward with its summed game score. nullopt when either
/// column has zero variance. Throws when fewer than two windows exist.
std::optional<double> correlation(std::span<const EpisodeTrace> episodes, int window);
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// "step,episode,score,aux_sum" rows, one per complete episode.
std::string curves_csv(std::span<const EpisodeTrace> episodes);

struct CurvePoint {
  long step = 0;
  double score = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Trailing mean of the last `window` complete episodes, sampled at `points`
/// evenly spaced steps. Points before the first complete episode are skipped.
std::vector<CurvePoint> learning_curve(std::span<const EpisodeTrace> episodes, long total_steps, int window,
                                       int points = 40);
/// Pointwise mean over seeds of equally sampled curves.
std::vector<CurvePoint> mean_curve(std::span<const std::vector<CurvePoint>> curves);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  /// Exit-code class of the failure: "config", "provider", "divergence" or "other".
  std::string error_kind;
  double final_score = 0.0;
  int episodes = 0;
  std::optional<double> correlation;
  std::string curves;
};

struct ArmReport {
  std::string arm;
  std::vector<SeedResult> seeds;
  double mean = 0.0;
  double std = 0.0;
  std::vector<CurvePoint> curve;

  /// Mean and population std over successful seeds.
  void summarise();
};

struct RunReport {
  nlohmann::json config;
  std::string game;
  std::string agent;
  long steps = 0;
  int window = 50;
  std::vector<ArmReport> arms;
  nlohmann::json rewards;
  std::vector<std::string> failures;

  const ArmReport* arm(const std::string& name) const;
  /// The assisted arm when present, else the baseline.
  const ArmReport& primary() const;
  bool all_ok() const;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Executes read, reason and train for every seed and arm, writing
/// context.json, rewards.json, <arm>/seed_<n>/curves.csv, report.json and
/// optionally plot.svg under config.out. Stage failures become per-seed markers.
RunReport run(const RunConfig& config);

struct Comparison {
  std::string game;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double std_a = 0.0;
  double std_b = 0.0;
  /// (b - a) / |a| in percent; nullopt when a's mean is zero.
  std::optional<double> improvement_pct;
  /// Steps for `a` to first reach its own final mean, divided by steps for `b`
  /// to first reach that level. nullopt when `b` never gets there.
  std::optional<double> speedup;
  long step_a = 0;
  std::optional<long> step_b;
};

/// First sampled step at which the curve reaches `level`.
std::optional<long> first_reach(std::span<const CurvePoint> curve, double level);
/// Reference steps to reach its final level over candidate steps to reach it.
std::optional<double> speedup_ratio(std::span<const CurvePoint> reference, std::span<const CurvePoint> candidate);

/// Compares the primary arms of two reports. Throws ConfigError when the game
/// or step budget differ.
Comparison compare(const RunReport& a, const RunReport& b);
/// Baseline against assisted within one report.
Comparison compare(const RunReport& report);
Comparison compare_arms(const std::string& game, const ArmReport& a, const ArmReport& b);
std::string format_comparison(const Comparison& c, const std::string& label_a, const std::string& label_b);

/// Two-line SVG of mean learning curves.
std::string render_svg(const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& series,
                       const std::string& title);

}  // namespace readward::harness
