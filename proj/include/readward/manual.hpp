#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "readward/qa_provider.hpp"

namespace readward::manual {

inline constexpr int kDefaultMaxTokens = 256;
inline constexpr int kDefaultTopK = 10;

enum class SourceTag { official, wiki, custom };

std::string to_string(SourceTag tag);
SourceTag parse_source_tag(const std::string& s);

struct ManualDoc {
  SourceTag source_tag = SourceTag::custom;
  /// Paragraphs joined by blank lines.
  std::string text;
  std::vector<std::string> paragraphs;
  /// Lowercased copy of text, used for keyword ranking.
  std::string lowered;
};

/// Strips HTML tags and entities, collapses whitespace and splits paragraphs on
/// blank lines (or block-level tags). Throws ConfigError when nothing remains.
ManualDoc normalize(std::string_view raw, SourceTag tag = SourceTag::custom);

struct Chunk {
  std::string text;
  int token_count = 0;
  int index = 0;
};

/// Greedy packing of whole paragraphs into chunks of at most max_tokens
/// whitespace-delimited words. A paragraph is split only when it alone is too long.
std::vector<Chunk> chunk(const ManualDoc& doc, int max_tokens = kDefaultMaxTokens);

struct KeywordRanking {
  std::vector<std::pair<std::string, double>> entries;
  /// Set when fewer than k candidate terms existed.
  bool short_list = false;
};

/// Paragraph-level TF-IDF over the manual's own paragraphs:
/// tf = count / paragraph length, idf = ln((1 + N) / (1 + df)) + 1, and a term's
/// score is its best paragraph. Stopwords and tokens shorter than 3 letters are
/// dropped; ties rank lexicographically.
KeywordRanking tfidf_rank(const ManualDoc& doc, int k = kDefaultTopK);

const std::array<std::string, 4>& generic_questions();
std::string object_question(std::string_view object);

struct QAPair {
  std::string question;
  std::string answer;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

/// Asks the question of every chunk and joins the non-empty answers with ". ".
QAPair extract(qa::Provider& provider, const ManualDoc& doc, const std::string& question,
               int max_tokens = kDefaultMaxTokens);

struct ContextBundle {
  std::string object;
  std::vector<QAPair> pairs;
  std::string rendered;
};

/// Answers to the four generic questions, in order (possibly empty).
std::vector<QAPair> ask_generic(qa::Provider& provider, const ManualDoc& doc, int max_tokens = kDefaultMaxTokens);

/// Keeps non-empty pairs, generic first, collapsing consecutive duplicate generic
/// answers. Throws EmptyContextError when no answer survives.
ContextBundle assemble_context(const std::string& object, const std::vector<QAPair>& generic,
                               const QAPair& object_pair);

ContextBundle build_context(qa::Provider& provider, const ManualDoc& doc, const std::string& object,
                            int max_tokens = kDefaultMaxTokens);

/// "Question: <q> Answer: <a>." lines joined by newlines.
std::string render(const std::vector<QAPair>& pairs);

/// Whether an env class name refers to a ranked keyword (exact or plural form).
bool grounds_to(const std::string& class_name, const KeywordRanking& ranking);

/// The context.json document.
struct ContextFile {
  std::string game;
  SourceTag source_tag = SourceTag::custom;
  KeywordRanking keywords;
  std::vector<ContextBundle> contexts;
};

nlohmann::json to_json(const ContextFile& file);
ContextFile context_file_from_json(const nlohmann::json& j);

}  // namespace readward::manual
