#include "readward/manual.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "readward/errors.hpp"
#include "readward/text.hpp"

namespace readward::manual {

using nlohmann::json;

std::string to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::official: return "official";
    case SourceTag::wiki: return "wiki";
    case SourceTag::custom: return "custom";
  }
  return "custom";
}

SourceTag parse_source_tag(const std::string& s) {
  if (s == "official") return SourceTag::official;
  if (s == "wiki") return SourceTag::wiki;
  if (s == "custom") return SourceTag::custom;
  throw ConfigError("unknown source tag '" + s + "' (expected official, wiki or custom)");
}

namespace {

const std::set<std::string>& block_tags() {
  static const std::set<std::string> tags{"p",  "br", "div", "h1", "h2", "h3", "h4", "h5", "h6", "li",
                                          "ul", "ol", "tr",  "table", "section", "article", "hr", "blockquote"};
  return tags;
}

std::string decode_entities(std::string_view s) {
  static const std::vector<std::pair<std::string_view, std::string_view>> entities{
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"}, {"&apos;", "'"}, {"&nbsp;", " "}};
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    bool replaced = false;
    if (s[i] == '&') {
      for (const auto& [from, to] : entities) {
        if (s.substr(i, from.size()) == from) {
          out += to;
          i += from.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += s[i++];
  }
  return out;
}

// Removes tags; block-level tags become paragraph breaks; script/style bodies go.
std::string strip_markup(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] != '<') {
      out += raw[i++];
      continue;
    }
    const size_t close = raw.find('>', i);
    if (close == std::string_view::npos) {
      out += raw.substr(i);
      break;
    }
    std::string_view tag = raw.substr(i + 1, close - i - 1);
    const bool closing = !tag.empty() && tag[0] == '/';
    if (closing) tag.remove_prefix(1);
    size_t n = 0;
    while (n < tag.size() && std::isalnum(static_cast<unsigned char>(tag[n]))) ++n;
    const std::string name = text::to_lower(tag.substr(0, n));
    i = close + 1;
    if (!closing && (name == "script" || name == "style")) {
      const auto end = text::to_lower(raw.substr(i)).find("</" + name);
      i = end == std::string::npos ? raw.size() : i + end;
      continue;
    }
    if (block_tags().contains(name)) {
      out += "\n\n";
    } else {
      out += ' ';
    }
  }
  return decode_entities(out);
}

}  // namespace

ManualDoc normalize(std::string_view raw, SourceTag tag) {
  if (raw.empty()) throw ConfigError("manual text is empty");
  std::string stripped = strip_markup(raw);
  std::replace(stripped.begin(), stripped.end(), '\r', '\n');

  ManualDoc doc;
  doc.source_tag = tag;
  std::string current;
  auto flush = [&] {
    auto p = text::collapse_whitespace(current);
    if (!p.empty()) doc.paragraphs.push_back(std::move(p));
    current.clear();
  };
  size_t i = 0;
  while (i < stripped.size()) {
    if (stripped[i] == '\n') {
      // A line holding only whitespace ends the paragraph.
      size_t j = i + 1;
      while (j < stripped.size() && stripped[j] != '\n' && std::isspace(static_cast<unsigned char>(stripped[j]))) ++j;
      if (j < stripped.size() && stripped[j] == '\n') {
        flush();
        i = j + 1;
        continue;
      }
      current += ' ';
      ++i;
      continue;
    }
    current += stripped[i++];
  }
  flush();
  if (doc.paragraphs.empty()) throw ConfigError("manual has no text after normalization");
  doc.text = text::join(doc.paragraphs, "\n\n");
  doc.lowered = text::to_lower(doc.text);
  return doc;
}

std::vector<Chunk> chunk(const ManualDoc& doc, int max_tokens) {
  if (max_tokens < 32) throw PreconditionError("max_tokens must be at least 32");
  const auto limit = static_cast<size_t>(max_tokens);
  std::vector<Chunk> chunks;
  std::vector<std::string> parts;  // pieces of the chunk being filled
  size_t used = 0;
  auto flush = [&] {
    if (parts.empty()) return;
    chunks.push_back({text::join(parts, "\n\n"), static_cast<int>(used), static_cast<int>(chunks.size())});
    parts.clear();
    used = 0;
  };
  for (const auto& paragraph : doc.paragraphs) {
    const auto words = text::split_words(paragraph);
    if (words.size() <= limit) {
      if (used + words.size() > limit) flush();
      parts.push_back(paragraph);
      used += words.size();
      continue;
    }
    flush();
    for (size_t start = 0; start < words.size(); start += limit) {
      const size_t end = std::min(words.size(), start + limit);
      std::vector<std::string> piece(words.begin() + static_cast<long>(start), words.begin() + static_cast<long>(end));
      parts.push_back(text::join(piece, " "));
      used = piece.size();
      if (end < words.size()) flush();
    }
  }
  flush();
  return chunks;
}

KeywordRanking tfidf_rank(const ManualDoc& doc, int k) {
  if (k < 1) throw PreconditionError("k must be at least 1");
  const auto n_docs = static_cast<double>(doc.paragraphs.size());
  std::vector<std::map<std::string, int>> counts;
  std::vector<size_t> lengths;
  std::map<std::string, int> df;
  for (const auto& p : doc.paragraphs) {
    const auto tokens = text::alpha_tokens(p);
    std::map<std::string, int> c;
    for (const auto& t : tokens) {
      if (t.size() < 3 || text::is_stopword(t)) continue;
      ++c[t];
    }
    for (const auto& [t, _] : c) ++df[t];
    counts.push_back(std::move(c));
    lengths.push_back(tokens.size());
  }

  std::map<std::string, double> best;
  for (size_t i = 0; i < counts.size(); ++i) {
    for (const auto& [t, c] : counts[i]) {
      const double tf = static_cast<double>(c) / static_cast<double>(lengths[i]);
      const double idf = std::log((1.0 + n_docs) / (1.0 + df[t])) + 1.0;
      auto& b = best[t];
      b = std::max(b, tf * idf);
    }
  }

  KeywordRanking ranking;
  ranking.entries.assign(best.begin(), best.end());
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranking.short_list = ranking.entries.size() < static_cast<size_t>(k);
  if (!ranking.short_list) ranking.entries.resize(static_cast<size_t>(k));
  return ranking;
}

const std::array<std::string, 4>& generic_questions() {
  static const std::array<std::string, 4> questions{"What is the objective of the game?", "How to succeed in the game?",
                                                    "How to score at the game?", "Who are your enemies?"};
  return questions;
}

std::string object_question(std::string_view object) {
  if (text::trim(object).empty()) throw PreconditionError("object name must be nonempty");
  return "What happens when the player hit a " + std::string(object) + "?";
}

namespace {

std::string clean_answer(std::string a) {
  a = text::collapse_whitespace(a);
  while (!a.empty() && (a.back() == '.' || a.back() == ' ')) a.pop_back();
  return a;
}

}  // namespace

QAPair extract(qa::Provider& provider, const ManualDoc& doc, const std::string& question, int max_tokens) {
  std::vector<std::string> answers;
  for (const auto& c : chunk(doc, max_tokens)) {
    std::string a;
    try {
      a = provider.answer({c.text, question});
    } catch (const FixtureMissError& e) {
      throw FixtureMissError(std::string(e.what()) + " (chunk " + std::to_string(c.index) + ")");
    } catch (const TransportError& e) {
      throw TransportError(std::string(e.what()) + " (chunk " + std::to_string(c.index) + ")");
    } catch (const ProviderError& e) {
      throw ProviderError(std::string(e.what()) + " (chunk " + std::to_string(c.index) + ")");
    }
    a = clean_answer(std::move(a));
    if (!a.empty()) answers.push_back(std::move(a));
  }
  return {question, text::join(answers, ". ")};
}

std::vector<QAPair> ask_generic(qa::Provider& provider, const ManualDoc& doc, int max_tokens) {
  std::vector<QAPair> pairs;
  for (const auto& q : generic_questions()) pairs.push_back(extract(provider, doc, q, max_tokens));
  return pairs;
}

std::string render(const std::vector<QAPair>& pairs) {
  std::vector<std::string> lines;
  for (const auto& p : pairs) lines.push_back("Question: " + p.question + " Answer: " + p.answer + ".");
  return text::join(lines, "\n");
}

ContextBundle assemble_context(const std::string& object, const std::vector<QAPair>& generic,
                               const QAPair& object_pair) {
  ContextBundle b;
  b.object = object;
  const std::string* last = nullptr;
  for (const auto& p : generic) {
    if (p.answer.empty()) continue;
    if (last && *last == p.answer) continue;
    b.pairs.push_back(p);
    last = &p.answer;
  }
  if (!object_pair.answer.empty()) b.pairs.push_back(object_pair);
  if (b.pairs.empty()) throw EmptyContextError("no non-empty answers for object '" + object + "'");
  b.rendered = render(b.pairs);
  return b;
}

ContextBundle build_context(qa::Provider& provider, const ManualDoc& doc, const std::string& object, int max_tokens) {
  const auto question = object_question(object);
  const auto generic = ask_generic(provider, doc, max_tokens);
  return assemble_context(object, generic, extract(provider, doc, question, max_tokens));
}

bool grounds_to(const std::string& class_name, const KeywordRanking& ranking) {
  const auto c = text::to_lower(class_name);
  for (const auto& [term, _] : ranking.entries) {
    if (term == c || term == c + "s" || term == c + "es") return true;
  }
  return false;
}

json to_json(const ContextFile& file) {
  json kw = json::array();
  for (const auto& [t, s] : file.keywords.entries) kw.push_back({{"term", t}, {"score", s}});
  json ctx = json::array();
  for (const auto& c : file.contexts) {
    json pairs = json::array();
    for (const auto& p : c.pairs) pairs.push_back({{"q", p.question}, {"a", p.answer}});
    ctx.push_back({{"object", c.object}, {"pairs", pairs}, {"rendered", c.rendered}});
  }
  return {{"game", file.game}, {"source_tag", to_string(file.source_tag)}, {"keywords", kw}, {"contexts", ctx}};
}

ContextFile context_file_from_json(const json& j) {
  try {
    ContextFile f;
    f.game = j.at("game").get<std::string>();
    f.source_tag = parse_source_tag(j.at("source_tag").get<std::string>());
    for (const auto& k : j.at("keywords")) {
      f.keywords.entries.emplace_back(k.at("term").get<std::string>(), k.at("score").get<double>());
    }
    for (const auto& c : j.at("contexts")) {
      ContextBundle b;
      b.object = c.at("object").get<std::string>();
      for (const auto& p : c.at("pairs")) b.pairs.push_back({p.at("q").get<std::string>(), p.at("a").get<std::string>()});
      b.rendered = c.at("rendered").get<std::string>();
      if (b.pairs.empty()) throw ConfigError("context for '" + b.object + "' has no pairs");
      if (b.rendered != render(b.pairs)) throw ConfigError("context for '" + b.object + "' has inconsistent rendered text");
      f.contexts.push_back(std::move(b));
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed context file: ") + e.what());
  }
}

}  // namespace readward::manual
