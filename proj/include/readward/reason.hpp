#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readward/manual.hpp"
#include "readward/qa_provider.hpp"

namespace readward::reason {

/// Accepted range for r_p and r_n, inclusive on both ends.
inline constexpr double kMinRewardScale = 2.0;
inline constexpr double kMaxRewardScale = 50.0;
inline constexpr double kDefaultReward = 5.0;

enum class Verdict { Yes, No, Abstain };

std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

struct RewardRule {
  std::string object;
  Verdict verdict = Verdict::Abstain;
  double reward = 0.0;

  friend bool operator==(const RewardRule&, const RewardRule&) = default;
};

/// Maps each reasoned object class to its auxiliary reward. Immutable once built.
class RewardTable {
public:
  /// Validates r_p, r_n and the verdict/reward pairing of every rule.
  RewardTable(double r_p, double r_n, std::vector<RewardRule> rules);

  double r_p() const { return r_p_; }
  double r_n() const { return r_n_; }
  const std::map<std::string, RewardRule>& rules() const { return rules_; }
  /// Reward for a class, or nullopt when the class was never reasoned about.
  std::optional<double> reward_for(const std::string& object) const;
  bool all_abstain() const;

  friend bool operator==(const RewardTable&, const RewardTable&) = default;

private:
  double r_p_;
  double r_n_;
  std::map<std::string, RewardRule> rules_;
};

void validate_scales(double r_p, double r_n);
double reward_for(Verdict v, double r_p, double r_n);

/// "<rendered>\nQuestion: Should you hit a <object> if you want to win? Answer: "
std::string compose_prompt(const manual::ContextBundle& ctx);

/// Prompt-hash keyed store of choice scores, persisted as JSON.
class DecisionCache {
public:
  DecisionCache() = default;
  explicit DecisionCache(std::filesystem::path path);

  /// Scores for the prompt; an empty vector records an abstention.
  std::optional<std::vector<double>> find(const std::string& prompt) const;
  void put(const std::string& prompt, std::vector<double> scores);
  void save() const;

private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<double>> entries_;
};

/// Scores {Yes, No} on the composed prompt. Ties go to No; an abstaining
/// provider yields Abstain with zero reward.
RewardRule decide(qa::Provider& provider, const manual::ContextBundle& ctx, double r_p = kDefaultReward,
                  double r_n = kDefaultReward, DecisionCache* cache = nullptr);

/// One decide() per context, run concurrently; the table is frozen on return.
RewardTable build_table(qa::Provider& provider, std::span<const manual::ContextBundle> contexts,
                        double r_p = kDefaultReward, double r_n = kDefaultReward, DecisionCache* cache = nullptr);

nlohmann::json to_json(const RewardTable& table);
RewardTable table_from_json(const nlohmann::json& j);

}  // namespace readward::reason
