#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace readward::qa {

struct ExtractiveQuery {
  std::string passage;
  std::string question;
};

struct ChoiceQuery {
  std::string prompt;
  std::vector<std::string> choices;
};

struct ChoiceScores {
  std::vector<double> scores;

  /// Index of the highest score; the earliest choice wins ties.
  std::size_t best() const;
};

/// Answers extractive questions and scores multiple-choice prompts.
/// Implementations must be safe to call from several threads at once.
class Provider {
public:
  virtual ~Provider() = default;

  /// A span of the passage answering the question, or "" when unanswerable.
  virtual std::string answer(const ExtractiveQuery& query) = 0;
  virtual ChoiceScores score_choices(const ChoiceQuery& query) = 0;
  virtual std::string name() const = 0;
};

/// Hermetic provider: sentence-overlap extraction and cue-lexicon choice scoring.
class LexicalProvider final : public Provider {
public:
  static constexpr double kAnswerThreshold = 0.15;
  static constexpr double kObjectPairWeight = 2.0;

  std::string answer(const ExtractiveQuery& query) override;
  /// Choices must be exactly {"Yes", "No"}. Throws AbstainError when no cue fires.
  ChoiceScores score_choices(const ChoiceQuery& query) override;
  std::string name() const override { return "lexical"; }

  static const std::vector<std::string>& negative_cues();
  static const std::vector<std::string>& positive_cues();
  /// True when word equals cue or a regular inflection of it (-s, -es, -ed, -d, -ing).
  static bool matches_cue(const std::string& lower_word, const std::string& cue);
};

/// Replays recorded results keyed by SHA-256 of passage/question or prompt.
class FixtureProvider final : public Provider {
public:
  explicit FixtureProvider(const nlohmann::json& entries);
  static FixtureProvider load(const std::filesystem::path& path);

  std::string answer(const ExtractiveQuery& query) override;
  ChoiceScores score_choices(const ChoiceQuery& query) override;
  std::string name() const override { return "fixture"; }

private:
  std::map<std::pair<std::string, std::string>, std::string> answers_;
  std::map<std::string, std::vector<double>> scores_;
};

struct HttpOptions {
  std::string url;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};
  int max_in_flight = 4;
};

/// JSON-over-HTTP client: POST /answer and POST /score.
class HttpProvider final : public Provider {
public:
  explicit HttpProvider(HttpOptions options);

  std::string answer(const ExtractiveQuery& query) override;
  ChoiceScores score_choices(const ChoiceQuery& query) override;
  std::string name() const override { return "http"; }

private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);
  nlohmann::json post_once(const std::string& path, const std::string& body);

  HttpOptions options_;
  std::string host_;  // scheme://host[:port]
  std::string base_path_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex retry_mutex_;
};

/// Forwards to another provider and records every result as a fixture entry.
class RecordingProvider final : public Provider {
public:
  explicit RecordingProvider(std::shared_ptr<Provider> inner);

  std::string answer(const ExtractiveQuery& query) override;
  ChoiceScores score_choices(const ChoiceQuery& query) override;
  std::string name() const override { return inner_->name(); }

  /// Recorded entries in the fixture file schema, sorted for stable output.
  nlohmann::json entries() const;
  void save(const std::filesystem::path& path) const;

private:
  std::shared_ptr<Provider> inner_;
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> entries_;
  std::map<std::string, std::size_t> seen_;
};

/// "lexical", "fixture:<path>", "http:<url>" or "http" (URL from READWARD_QA_URL).
/// READWARD_QA_URL, when set, overrides the URL of any http spec.
std::shared_ptr<Provider> make_provider(const std::string& spec);

}  // namespace readward::qa
