#include <algorithm>
#include <set>

#include "readward/errors.hpp"
#include "readward/qa_provider.hpp"
#include "readward/text.hpp"

namespace readward::qa {
namespace {

constexpr std::string_view kObjectQuestionPrefix = "What happens when the player hit a";

struct AnsweredPair {
  std::string question;
  std::string answer;
};

// Pulls "Question: <q> Answer: <a>" pairs out of a rendered context prompt.
// The trailing reasoning question has an empty answer and is dropped.
std::vector<AnsweredPair> parse_pairs(const std::string& prompt) {
  std::vector<AnsweredPair> pairs;
  size_t pos = 0;
  while (true) {
    const size_t q = prompt.find("Question:", pos);
    if (q == std::string::npos) break;
    const size_t a = prompt.find("Answer:", q);
    if (a == std::string::npos) break;
    size_t end = prompt.find("Question:", a);
    if (end == std::string::npos) end = prompt.size();
    AnsweredPair p{text::trim(prompt.substr(q + 9, a - q - 9)), text::trim(prompt.substr(a + 7, end - a - 7))};
    if (!p.answer.empty()) pairs.push_back(std::move(p));
    pos = end;
  }
  return pairs;
}

double count_cues(const std::string& s, const std::vector<std::string>& cues) {
  double n = 0;
  for (const auto& w : text::alpha_tokens(s)) {
    for (const auto& c : cues) {
      if (LexicalProvider::matches_cue(w, c)) {
        n += 1;
        break;
      }
    }
  }
  return n;
}

}  // namespace

std::size_t ChoiceScores::best() const {
  if (scores.empty()) throw PreconditionError("ChoiceScores::best on empty scores");
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::string LexicalProvider::answer(const ExtractiveQuery& query) {
  if (text::trim(query.passage).empty() || text::trim(query.question).empty()) {
    throw PreconditionError("extractive query needs a nonempty passage and question");
  }
  const auto qwords = text::content_words(query.question);
  const std::set<std::string> qset(qwords.begin(), qwords.end());
  if (qset.empty()) return "";

  std::string best;
  double best_score = -1.0;
  for (const auto& sentence : text::split_sentences(query.passage)) {
    const auto swords = text::content_words(sentence);
    const std::set<std::string> sset(swords.begin(), swords.end());
    long overlap = 0;
    for (const auto& w : qset) overlap += sset.contains(w) ? 1 : 0;
    const double score = static_cast<double>(overlap) / static_cast<double>(qset.size());
    if (score > best_score) {
      best_score = score;
      best = sentence;
    }
  }
  return best_score >= kAnswerThreshold ? best : std::string{};
}

ChoiceScores LexicalProvider::score_choices(const ChoiceQuery& query) {
  if (query.choices != std::vector<std::string>{"Yes", "No"}) {
    throw PreconditionError("lexical scorer only supports choices {Yes, No}");
  }
  double yes = 0;
  double no = 0;
  const auto pairs = parse_pairs(query.prompt);
  if (pairs.empty()) {
    yes = count_cues(query.prompt, positive_cues());
    no = count_cues(query.prompt, negative_cues());
  }
  for (const auto& p : pairs) {
    const double w = p.question.starts_with(kObjectQuestionPrefix) ? kObjectPairWeight : 1.0;
    yes += w * count_cues(p.answer, positive_cues());
    no += w * count_cues(p.answer, negative_cues());
  }
  if (yes == 0 && no == 0) throw AbstainError("no Yes/No cue found in prompt");
  return {{yes, no}};
}

const std::vector<std::string>& LexicalProvider::negative_cues() {
  static const std::vector<std::string> cues{"avoid", "lose",  "enemy", "enemies", "penalty",
                                             "death", "dies", "wrapped", "crash"};
  return cues;
}

const std::vector<std::string>& LexicalProvider::positive_cues() {
  static const std::vector<std::string> cues{"score", "points", "eat", "gobble", "win", "bonus", "collect"};
  return cues;
}

bool LexicalProvider::matches_cue(const std::string& w, const std::string& cue) {
  if (cue.ends_with('e') && w == cue.substr(0, cue.size() - 1) + "ing") return true;  // lose -> losing
  if (!w.starts_with(cue)) return false;
  const std::string_view rest = std::string_view(w).substr(cue.size());
  if (rest.empty() || rest == "s" || rest == "es" || rest == "ed" || rest == "d" || rest == "ing") return true;
  return false;
}

}  // namespace readward::qa
