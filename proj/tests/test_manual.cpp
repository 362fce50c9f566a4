#include <doctest.h>

#include <set>

#include <cctype>
#include <cmath>
#include <map>
#include <regex>

#include "readward/errors.hpp"
#include "readward/harness.hpp"
#include "readward/manual.hpp"
#include "readward/text.hpp"
#include "support.hpp"

using namespace readward;
using namespace readward::manual;

namespace {

std::string words(const std::string& stem, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

qa::FixtureProvider official_fixture() {
  return qa::FixtureProvider::load(harness::data_dir() / "fixtures" / "pacman_official.json");
}

ManualDoc official_manual() {
  return normalize(harness::read_text_file(harness::data_dir() / "manuals" / "pacman_official.txt"),
                   SourceTag::official);
}

// Straight transcription of the ranking formula over a list of paragraphs.
std::map<std::string, double> tfidf_oracle(const std::vector<std::string>& paragraphs) {
  std::vector<std::vector<std::string>> toks;
  for (const auto& p : paragraphs) {
    std::vector<std::string> t;
    std::string cur;
    for (char ch : p + " ") {
      if (std::isalpha(static_cast<unsigned char>(ch))) {
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else if (!cur.empty()) {
        t.push_back(cur);
        cur.clear();
      }
    }
    toks.push_back(t);
  }
  std::map<std::string, int> df;
  for (const auto& t : toks) {
    std::set<std::string> seen(t.begin(), t.end());
    for (const auto& w : seen) ++df[w];
  }
  std::map<std::string, double> best;
  const double n = static_cast<double>(paragraphs.size());
  for (const auto& t : toks) {
    std::map<std::string, int> c;
    for (const auto& w : t) ++c[w];
    for (const auto& [w, k] : c) {
      if (w.size() < 3 || text::is_stopword(w)) continue;
      const double score = (static_cast<double>(k) / static_cast<double>(t.size())) *
                           (std::log((1 + n) / (1 + df[w])) + 1);
      best[w] = std::max(best[w], score);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("normalize strips markup and splits paragraphs") {
  const auto d = normalize("<p>Hello  world</p>");
  CHECK(d.text == "Hello world");
  CHECK(d.paragraphs.size() == 1);

  const auto two = normalize("First paragraph here.\n\nSecond one.");
  CHECK(two.paragraphs.size() == 2);
  CHECK(two.lowered == text::to_lower(two.text));

  CHECK_THROWS_AS(normalize("<div><br/></div>"), ConfigError);
  CHECK_THROWS_AS(normalize("   \n  "), ConfigError);
}

TEST_CASE("normalize decodes entities and drops scripts") {
  const auto d = normalize("<html><script>var x = 1;</script><p>Fish &amp; chips</p><p>Next</p></html>");
  CHECK(d.paragraphs == std::vector<std::string>{"Fish & chips", "Next"});
}

TEST_CASE("chunk packs whole paragraphs greedily") {
  const auto doc = normalize(words("a", 100) + "\n\n" + words("b", 100) + "\n\n" + words("c", 100));
  const auto chunks = chunk(doc, 250);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].text == words("a", 100) + "\n\n" + words("b", 100));
  CHECK(chunks[0].token_count == 200);
  CHECK(chunks[1].text == words("c", 100));
  CHECK(chunks[1].index == 1);
}

TEST_CASE("chunk of a short document is the document") {
  const auto doc = normalize("A short manual.\n\nTwo paragraphs.");
  const auto chunks = chunk(doc);
  REQUIRE(chunks.size() == 1);
  CHECK(text::collapse_whitespace(chunks[0].text) == text::collapse_whitespace(doc.text));
}

TEST_CASE("chunk splits an oversized paragraph") {
  const auto doc = normalize(words("w", 600));
  const auto chunks = chunk(doc, 256);
  REQUIRE(chunks.size() == 3);
  std::string joined;
  for (const auto& c : chunks) {
    CHECK(c.token_count <= 256);
    joined += (joined.empty() ? "" : " ") + c.text;
  }
  CHECK(joined == words("w", 600));
  CHECK(chunks[0].token_count == 256);
  CHECK(chunks[2].token_count == 600 - 512);
}

TEST_CASE("tfidf ranks a concentrated term first and matches the formula") {
  const std::vector<std::string> paras{
      "The ghost chases you. A ghost is fast. Every ghost glows. The ghost turns. One ghost.",
      "You can move the joystick in the maze and the game will start when you press the button.",
      "The maze has walls and the game ends when the maze is clear of every dot in the game."};
  const auto doc = normalize(paras[0] + "\n\n" + paras[1] + "\n\n" + paras[2]);
  const auto ranking = tfidf_rank(doc, 10);
  REQUIRE_FALSE(ranking.entries.empty());
  CHECK(ranking.entries[0].first == "ghost");

  const auto oracle = tfidf_oracle(paras);
  for (const auto& [term, score] : ranking.entries) {
    CAPTURE(term);
    REQUIRE(oracle.count(term) == 1);
    CHECK(score == doctest::Approx(oracle.at(term)).epsilon(1e-12));
  }
  for (size_t i = 1; i < ranking.entries.size(); ++i) {
    const auto& [pt, ps] = ranking.entries[i - 1];
    const auto& [t, s] = ranking.entries[i];
    CHECK(ps >= s);
    if (ps == s) CHECK(pt < t);
  }
}

TEST_CASE("tfidf defaults and edge cases") {
  CHECK(kDefaultTopK == 10);
  const auto stop = tfidf_rank(normalize("the and of to it is was"), 10);
  CHECK(stop.entries.empty());
  CHECK(stop.short_list);
  CHECK_THROWS_AS(tfidf_rank(normalize("ghost"), 0), PreconditionError);
  const auto few = tfidf_rank(normalize("ghost pellet maze"), 10);
  CHECK(few.short_list);
  CHECK(few.entries.size() == 3);
}

TEST_CASE("generic and object questions") {
  const auto& g = generic_questions();
  CHECK(g.size() == 4);
  CHECK(g[0] == "What is the objective of the game?");
  CHECK(g[1] == "How to succeed in the game?");
  CHECK(g[2] == "How to score at the game?");
  CHECK(g[3] == "Who are your enemies?");
  CHECK(object_question("ghost") == "What happens when the player hit a ghost?");
  CHECK(object_question("tree") == "What happens when the player hit a tree?");
  CHECK_THROWS_AS(object_question(""), PreconditionError);
}

TEST_CASE("extract joins per-chunk answers") {
  testing::SpanProvider p;
  p.spans["Q?"] = {"alpha span", "beta span"};
  const auto doc = normalize(words("a", 40) + " alpha span\n\n" + words("b", 40) + " beta span");
  CHECK(extract(p, doc, "Q?", 50).answer == "alpha span. beta span");
  CHECK(extract(p, doc, "Q?", 256).answer == "alpha span");
  CHECK(extract(p, doc, "Unknown?", 50).answer.empty());
}

TEST_CASE("extract on the official Pacman manual finds the enemies") {
  auto p = official_fixture();
  const auto doc = official_manual();
  CHECK(chunk(doc).size() == 2);
  const auto enemies = extract(p, doc, "Who are your enemies?");
  CHECK(enemies.answer == "Ghosts. stay close to an energy pill before eating it, and tease the ghosts");
  CHECK(extract(p, doc, "What is the objective of the game?").answer ==
        "To score as many points as you can practice clearing the maze of dots before trying to gobble up the ghosts");
  CHECK(extract(p, doc, "How to succeed in the game?").answer == "Score as many points as you can");
  CHECK(extract(p, doc, "How to score at the game?").answer.empty());
}

TEST_CASE("build_context on the official manual carries the objective and ghost answers") {
  auto p = official_fixture();
  const auto b = build_context(p, official_manual(), "ghost");
  CHECK(b.object == "ghost");
  CHECK(b.rendered.find("Ghosts") != std::string::npos);
  CHECK(b.rendered.find("To score as many points as you can practice clearing the maze of dots") != std::string::npos);
  CHECK(b.pairs.back().question == object_question("ghost"));
  CHECK(b.rendered.find("Answer: .") == std::string::npos);
}

TEST_CASE("build_context on the wiki manual collapses the repeated answer") {
  auto p = qa::FixtureProvider::load(harness::data_dir() / "fixtures" / "pacman_wiki.json");
  const auto doc =
      normalize(harness::read_text_file(harness::data_dir() / "manuals" / "pacman_wiki.txt"), SourceTag::wiki);
  const auto generic = ask_generic(p, doc);
  for (int i = 0; i < 3; ++i) CHECK(generic[i].answer == "The player earns points by eating pellets and avoiding ghosts");
  CHECK(generic[3].answer.empty());
  const auto b = build_context(p, doc, "pellet");
  REQUIRE(b.pairs.size() == 1);
  CHECK(b.rendered ==
        "Question: What is the objective of the game? Answer: The player earns points by eating pellets and avoiding "
        "ghosts.");
}

TEST_CASE("assemble_context keeps generic pairs first and rejects empty context") {
  const std::vector<QAPair> generic{{"G1?", "one"}, {"G2?", ""}, {"G3?", "three"}, {"G4?", "three"}};
  const auto b = assemble_context("ghost", generic, {"O?", "object answer"});
  REQUIRE(b.pairs.size() == 3);
  CHECK(b.pairs[0].answer == "one");
  CHECK(b.pairs[1].answer == "three");
  CHECK(b.pairs[2].question == "O?");
  CHECK(b.rendered == "Question: G1? Answer: one.\nQuestion: G3? Answer: three.\nQuestion: O? Answer: object answer.");

  const auto generic_only = assemble_context("ghost", generic, {"O?", ""});
  CHECK(generic_only.pairs.size() == 2);

  const std::vector<QAPair> none{{"G1?", ""}, {"G2?", ""}};
  CHECK_THROWS_AS(assemble_context("ghost", none, {"O?", ""}), EmptyContextError);
}

TEST_CASE("grounding accepts plural keyword forms") {
  KeywordRanking r;
  r.entries = {{"ghosts", 1.0}, {"pellet", 0.5}, {"boxes", 0.2}};
  CHECK(grounds_to("ghost", r));
  CHECK(grounds_to("pellet", r));
  CHECK(grounds_to("box", r));
  CHECK_FALSE(grounds_to("tree", r));
}

TEST_CASE("context file round-trips through json") {
  ContextFile f;
  f.game = "dot_maze";
  f.source_tag = SourceTag::wiki;
  f.keywords.entries = {{"ghost", 0.5}};
  f.contexts.push_back(assemble_context("ghost", {{"G?", "avoid it"}}, {"O?", "you lose"}));
  const auto j = to_json(f);
  CHECK(j.at("source_tag") == "wiki");
  const auto back = context_file_from_json(j);
  CHECK(to_json(back) == j);

  auto bad = j;
  bad["contexts"][0]["rendered"] = "tampered";
  CHECK_THROWS_AS(context_file_from_json(bad), ConfigError);
  CHECK_THROWS_AS(context_file_from_json(nlohmann::json::object()), ConfigError);
}

TEST_CASE("bundled desk manuals ground every object class") {
  qa::LexicalProvider p;
  for (const auto& [game, classes] : std::map<std::string, std::vector<std::string>>{
           {"dot_maze", {"ghost", "pellet"}}, {"brick_wall", {"ball", "brick"}}, {"ski_run", {"gate", "tree"}}}) {
    CAPTURE(game);
    const auto doc = normalize(harness::read_text_file(harness::default_manual(game)));
    const auto ranking = tfidf_rank(doc);
    for (const auto& c : classes) CHECK(grounds_to(c, ranking));
  }
}
