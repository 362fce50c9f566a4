#include <algorithm>
#include <cmath>
#include <fstream>

#include "readward/errors.hpp"
#include "readward/qa_provider.hpp"
#include "readward/text.hpp"

namespace readward::qa {

using nlohmann::json;

FixtureProvider::FixtureProvider(const json& entries) {
  if (!entries.is_array()) throw ConfigError("fixture file must hold a JSON array");
  for (const auto& e : entries) {
    const auto kind = e.value("kind", std::string{});
    if (kind == "answer") {
      answers_[{e.at("passage_sha256").get<std::string>(), e.at("question_sha256").get<std::string>()}] =
          e.at("result").get<std::string>();
    } else if (kind == "score") {
      auto scores = e.at("result").get<std::vector<double>>();
      for (double s : scores) {
        if (!std::isfinite(s)) throw ConfigError("fixture score entry is not finite");
      }
      scores_[e.at("prompt_sha256").get<std::string>()] = std::move(scores);
    } else {
      throw ConfigError("fixture entry has unknown kind '" + kind + "'");
    }
  }
}

FixtureProvider FixtureProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture file " + path.string());
  try {
    return FixtureProvider(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("malformed fixture file " + path.string() + ": " + e.what());
  }
}

std::string FixtureProvider::answer(const ExtractiveQuery& query) {
  const auto p = text::sha256_hex(query.passage);
  const auto q = text::sha256_hex(query.question);
  auto it = answers_.find({p, q});
  if (it == answers_.end()) {
    throw FixtureMissError("fixture has no answer for question '" + query.question + "' on passage " +
                           p.substr(0, 12));
  }
  return it->second;
}

ChoiceScores FixtureProvider::score_choices(const ChoiceQuery& query) {
  const auto h = text::sha256_hex(query.prompt);
  auto it = scores_.find(h);
  if (it == scores_.end()) throw FixtureMissError("fixture has no scores for prompt " + h.substr(0, 12));
  if (it->second.size() != query.choices.size()) {
    throw ProviderError("fixture scores do not match the number of choices");
  }
  if (std::all_of(it->second.begin(), it->second.end(), [](double s) { return s == 0.0; })) {
    throw AbstainError("recorded scores are all zero");
  }
  return {it->second};
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {
  if (!inner_) throw PreconditionError("RecordingProvider needs a provider");
}

std::string RecordingProvider::answer(const ExtractiveQuery& query) {
  auto result = inner_->answer(query);
  json e{{"kind", "answer"},
         {"passage_sha256", text::sha256_hex(query.passage)},
         {"question_sha256", text::sha256_hex(query.question)},
         {"result", result}};
  const std::string key = "a:" + e["passage_sha256"].get<std::string>() + e["question_sha256"].get<std::string>();
  std::lock_guard lock(mutex_);
  if (!seen_.contains(key)) {
    seen_[key] = entries_.size();
    entries_.push_back(std::move(e));
  }
  return result;
}

ChoiceScores RecordingProvider::score_choices(const ChoiceQuery& query) {
  ChoiceScores result;
  const auto h = text::sha256_hex(query.prompt);
  try {
    result = inner_->score_choices(query);
  } catch (const AbstainError&) {
    // Recorded as zeros so replay abstains too.
    result.scores.assign(query.choices.size(), 0.0);
    std::lock_guard lock(mutex_);
    if (!seen_.contains("s:" + h)) {
      seen_["s:" + h] = entries_.size();
      entries_.push_back(json{{"kind", "score"}, {"prompt_sha256", h}, {"result", result.scores}});
    }
    throw;
  }
  std::lock_guard lock(mutex_);
  if (!seen_.contains("s:" + h)) {
    seen_["s:" + h] = entries_.size();
    entries_.push_back(json{{"kind", "score"}, {"prompt_sha256", h}, {"result", result.scores}});
  }
  return result;
}

json RecordingProvider::entries() const {
  std::vector<json> sorted;
  {
    std::lock_guard lock(mutex_);
    sorted = entries_;
  }
  // Stable order regardless of which concurrent call landed first.
  std::sort(sorted.begin(), sorted.end(), [](const json& a, const json& b) { return a.dump() < b.dump(); });
  return json(sorted);
}

void RecordingProvider::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write fixture file " + path.string());
  out << entries().dump(2) << '\n';
}

}  // namespace readward::qa
