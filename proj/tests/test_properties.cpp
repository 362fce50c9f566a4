#include <doctest.h>

#include <map>
#include <random>
#include <regex>
#include <set>

#include "oracles.hpp"
#include "readward/env.hpp"
#include "readward/interact.hpp"
#include "readward/manual.hpp"
#include "readward/text.hpp"
#include "support.hpp"

using namespace readward;

namespace {

std::vector<env::StepResult> random_episode(const std::string& game, std::uint64_t seed, bool delayed, int cap) {
  env::EnvConfig c;
  c.game = game;
  c.seed = seed;
  c.episode_cap = cap;
  c.delayed = delayed;
  auto e = env::make_env(c);
  std::mt19937_64 rng(seed * 31 + 7);
  std::uniform_int_distribution<int> act(0, e->num_actions() - 1);
  std::vector<env::StepResult> frames{e->reset()};
  while (!frames.back().terminal) frames.push_back(e->step(act(rng)));
  return frames;
}

const std::vector<std::string> kWords{"ghost", "pellet", "maze", "bridge", "tunnel", "fruit",
                                      "corner", "player", "energy", "score", "level", "round"};

std::string random_paragraph(std::mt19937_64& rng, int words) {
  std::uniform_int_distribution<size_t> pick(0, kWords.size() - 1);
  std::string p;
  for (int i = 0; i < words; ++i) p += (i ? " " : "") + kWords[pick(rng)];
  return p;
}

std::vector<std::string> split_answer(const std::string& answer) {
  std::vector<std::string> parts;
  size_t from = 0;
  for (size_t at = answer.find(". "); at != std::string::npos; at = answer.find(". ", from)) {
    parts.push_back(answer.substr(from, at - from));
    from = at + 2;
  }
  parts.push_back(answer.substr(from));
  return parts;
}

}  // namespace

TEST_CASE("every frame has one agent and in-bounds objects with stable identities") {
  for (const auto& game : env::game_names()) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      CAPTURE(game);
      CAPTURE(seed);
      const auto frames = random_episode(game, seed, false, 300);
      std::map<int, std::string> identity;
      for (const auto& f : frames) {
        int agents = 0;
        std::set<int> ids;
        for (const auto& o : f.objects) {
          agents += o.is_agent ? 1 : 0;
          CHECK(env::inside(o.box, static_cast<int>(f.frame.cols()), static_cast<int>(f.frame.rows())));
          CHECK(ids.insert(o.id).second);
          auto [it, fresh] = identity.emplace(o.id, o.class_name);
          if (!fresh) CHECK(it->second == o.class_name);
        }
        CHECK(agents == 1);
      }
    }
  }
}

TEST_CASE("episodes are a pure function of seed and actions") {
  for (const auto& game : env::game_names()) {
    for (std::uint64_t seed : {3u, 11u}) {
      const auto a = random_episode(game, seed, false, 200);
      const auto b = random_episode(game, seed, false, 200);
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
  }
}

TEST_CASE("delayed reward total equals native total") {
  for (const auto& game : env::game_names()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto frames = random_episode(game, seed, true, 250);
      double delayed = 0.0, native = 0.0;
      for (size_t i = 1; i < frames.size(); ++i) {
        delayed += frames[i].reward;
        native += frames[i].native_reward;
        if (!frames[i].terminal) CHECK(frames[i].reward == 0.0);
      }
      CHECK(delayed == doctest::Approx(native));
    }
  }
}

TEST_CASE("debounced events equal rising edges of contact") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution touch(0.4), seen(0.85);
  const interact::BBox object{10, 10, 11, 11};
  const interact::BBox near{11, 11, 12, 12}, far{20, 20, 21, 21};
  for (int trial = 0; trial < 300; ++trial) {
    interact::ContactState state;
    std::vector<bool> contact;
    int events = 0;
    for (int t = 0; t < 40; ++t) {
      interact::Track tr;
      tr.track_id = 1;
      tr.box = object;
      tr.class_votes = {{"ghost", 1}};
      tr.misses = seen(rng) ? 0 : 1;
      const bool c = touch(rng);
      const std::vector<interact::Track> tracks{tr};
      auto [ev, next] = interact::detect_events(c ? near : far, tracks, state, t);
      events += static_cast<int>(ev.size());
      state = std::move(next);
      // An unseen track holds its previous contact flag.
      if (tr.misses == 0) {
        contact.push_back(c);
      } else {
        contact.push_back(contact.empty() ? false : contact.back());
      }
    }
    CHECK(events == testing::rising_edges(contact));
  }
}

TEST_CASE("within one paragraph, more occurrences never rank lower") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto para = random_paragraph(rng, 30 + trial % 40);
    const auto ranking = manual::tfidf_rank(manual::normalize(para), 12);
    std::map<std::string, int> counts;
    for (const auto& w : text::split_words(para)) ++counts[w];
    for (size_t i = 1; i < ranking.entries.size(); ++i) {
      const auto& hi = ranking.entries[i - 1].first;
      const auto& lo = ranking.entries[i].first;
      CHECK(counts[hi] >= counts[lo]);
    }
  }
}

TEST_CASE("chunks cover the document in order within the token budget") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> paragraphs(1, 8), length(1, 400), budget(32, 300);
  for (int trial = 0; trial < 100; ++trial) {
    std::string raw;
    const int n = paragraphs(rng);
    for (int i = 0; i < n; ++i) raw += (i ? "\n\n" : "") + random_paragraph(rng, length(rng));
    const auto doc = manual::normalize(raw);
    const int max_tokens = budget(rng);
    std::vector<std::string> rebuilt;
    int index = 0;
    for (const auto& c : manual::chunk(doc, max_tokens)) {
      CHECK(c.index == index++);
      const auto words = text::split_words(c.text);
      CHECK(static_cast<int>(words.size()) == c.token_count);
      CHECK(c.token_count <= max_tokens);
      CHECK(c.token_count > 0);
      rebuilt.insert(rebuilt.end(), words.begin(), words.end());
    }
    CHECK(rebuilt == text::split_words(doc.text));
  }
}

TEST_CASE("context bundles contain only answers from the manual") {
  std::mt19937_64 rng(29);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 100; ++trial) {
    std::string raw;
    for (int i = 0; i < 4; ++i) raw += (i ? "\n\n" : "") + random_paragraph(rng, 20) + ".";
    const auto doc = manual::normalize(raw);
    testing::SpanProvider provider;
    const auto sentences = text::split_sentences(doc.text);
    for (const auto& q : manual::generic_questions()) {
      if (keep(rng)) provider.spans[q] = {sentences[rng() % sentences.size()]};
    }
    const auto object = kWords[rng() % kWords.size()];
    if (keep(rng)) provider.spans[manual::object_question(object)] = {sentences[rng() % sentences.size()]};

    try {
      const auto bundle = manual::build_context(provider, doc, object);
      const std::regex line(R"(Question: (.+\?) Answer: (.+)\.)");
      std::istringstream in(bundle.rendered);
      std::string l;
      size_t lines = 0;
      while (std::getline(in, l)) {
        std::smatch m;
        REQUIRE(std::regex_match(l, m, line));
        const auto answer = m[2].str();
        for (const auto& part : split_answer(answer)) {
          CHECK(doc.text.find(part) != std::string::npos);
        }
        ++lines;
      }
      CHECK(lines == bundle.pairs.size());
      for (const auto& p : bundle.pairs) CHECK_FALSE(p.answer.empty());
    } catch (const EmptyContextError&) {
      // Nothing configured that the manual contains.
    }
  }
}

TEST_CASE("object questions follow the fixed template") {
  const std::regex form(R"(What happens when the player hit a [a-z_ ]+\?)");
  for (const auto& w : kWords) CHECK(std::regex_match(manual::object_question(w), form));
  CHECK_THROWS_AS(manual::object_question("  "), PreconditionError);
}
