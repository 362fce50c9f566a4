#include "readward/reason.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>

#include "readward/errors.hpp"
#include "readward/log.hpp"
#include "readward/text.hpp"

namespace readward::reason {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "Yes";
    case Verdict::No: return "No";
    case Verdict::Abstain: return "Abstain";
  }
  return "Abstain";
}

Verdict parse_verdict(const std::string& s) {
  if (s == "Yes") return Verdict::Yes;
  if (s == "No") return Verdict::No;
  if (s == "Abstain") return Verdict::Abstain;
  throw ConfigError("unknown verdict '" + s + "'");
}

void validate_scales(double r_p, double r_n) {
  for (double r : {r_p, r_n}) {
    if (!std::isfinite(r) || r < kMinRewardScale || r > kMaxRewardScale) {
      throw ConfigError("auxiliary reward scale " + std::to_string(r) + " outside [2, 50]");
    }
  }
}

double reward_for(Verdict v, double r_p, double r_n) {
  switch (v) {
    case Verdict::Yes: return r_p;
    case Verdict::No: return -r_n;
    case Verdict::Abstain: return 0.0;
  }
  return 0.0;
}

RewardTable::RewardTable(double r_p, double r_n, std::vector<RewardRule> rules) : r_p_(r_p), r_n_(r_n) {
  validate_scales(r_p, r_n);
  for (auto& r : rules) {
    if (r.reward != reason::reward_for(r.verdict, r_p, r_n)) {
      throw ConfigError("rule for '" + r.object + "' pairs verdict " + to_string(r.verdict) + " with reward " +
                        std::to_string(r.reward));
    }
    if (!rules_.emplace(r.object, r).second) throw ConfigError("duplicate rule for '" + r.object + "'");
  }
}

std::optional<double> RewardTable::reward_for(const std::string& object) const {
  auto it = rules_.find(object);
  if (it == rules_.end()) return std::nullopt;
  return it->second.reward;
}

bool RewardTable::all_abstain() const {
  return std::all_of(rules_.begin(), rules_.end(),
                     [](const auto& kv) { return kv.second.verdict == Verdict::Abstain; });
}

std::string compose_prompt(const manual::ContextBundle& ctx) {
  if (ctx.pairs.empty() || ctx.rendered.empty()) throw PreconditionError("cannot reason over an empty context");
  return ctx.rendered + "\nQuestion: Should you hit a " + ctx.object + " if you want to win? Answer: ";
}

DecisionCache::DecisionCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  try {
    const auto j = json::parse(in);
    for (const auto& [k, v] : j.items()) entries_[k] = v.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed decision cache " + path_.string() + ": " + e.what());
  }
}

std::optional<std::vector<double>> DecisionCache::find(const std::string& prompt) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(text::sha256_hex(prompt));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void DecisionCache::put(const std::string& prompt, std::vector<double> scores) {
  std::lock_guard lock(mutex_);
  entries_[text::sha256_hex(prompt)] = std::move(scores);
}

void DecisionCache::save() const {
  if (path_.empty()) return;
  std::lock_guard lock(mutex_);
  std::ofstream out(path_);
  if (!out) throw ConfigError("cannot write decision cache " + path_.string());
  out << json(entries_).dump(2) << '\n';
}

RewardRule decide(qa::Provider& provider, const manual::ContextBundle& ctx, double r_p, double r_n,
                  DecisionCache* cache) {
  const auto prompt = compose_prompt(ctx);
  std::vector<double> scores;
  if (auto hit = cache ? cache->find(prompt) : std::nullopt) {
    scores = *hit;
  } else {
    try {
      scores = provider.score_choices({prompt, {"Yes", "No"}}).scores;
    } catch (const AbstainError& e) {
      scores.clear();
      log::warn("no verdict for '" + ctx.object + "' (" + e.what() + "); reward 0");
    }
    if (cache) cache->put(prompt, scores);
  }

  RewardRule rule{ctx.object, Verdict::Abstain, 0.0};
  if (scores.size() == 2) {
    rule.verdict = scores[0] > scores[1] ? Verdict::Yes : Verdict::No;
  } else if (!scores.empty()) {
    throw ProviderError("expected two choice scores, got " + std::to_string(scores.size()));
  }
  rule.reward = reward_for(rule.verdict, r_p, r_n);
  return rule;
}

RewardTable build_table(qa::Provider& provider, std::span<const manual::ContextBundle> contexts, double r_p,
                        double r_n, DecisionCache* cache) {
  validate_scales(r_p, r_n);
  std::vector<std::future<RewardRule>> pending;
  pending.reserve(contexts.size());
  for (const auto& ctx : contexts) {
    pending.push_back(std::async(std::launch::async, [&, c = &ctx] { return decide(provider, *c, r_p, r_n, cache); }));
  }
  std::vector<RewardRule> rules;
  for (auto& f : pending) rules.push_back(f.get());
  RewardTable table(r_p, r_n, std::move(rules));
  if (table.all_abstain()) log::warn("every object abstained; auxiliary rewards will all be zero");
  return table;
}

json to_json(const RewardTable& table) {
  json rules = json::array();
  for (const auto& [_, r] : table.rules()) {
    rules.push_back({{"object", r.object}, {"verdict", to_string(r.verdict)}, {"reward", r.reward}});
  }
  return {{"r_p", table.r_p()}, {"r_n", table.r_n()}, {"rules", rules}};
}

RewardTable table_from_json(const json& j) {
  try {
    std::vector<RewardRule> rules;
    for (const auto& r : j.at("rules")) {
      rules.push_back({r.at("object").get<std::string>(), parse_verdict(r.at("verdict").get<std::string>()),
                       r.at("reward").get<double>()});
    }
    return RewardTable(j.at("r_p").get<double>(), j.at("r_n").get<double>(), std::move(rules));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed rewards file: ") + e.what());
  }
}

}  // namespace readward::reason
