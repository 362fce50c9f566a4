#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <future>
#include <thread>

#include "readward/errors.hpp"
#include "readward/harness.hpp"
#include "readward/manual.hpp"
#include "readward/qa_provider.hpp"
#include "readward/text.hpp"
#include "support.hpp"

// After Eigen: resolv.h defines a macro that collides with Eigen parameter names.
#include <httplib.h>

using namespace readward;
using namespace readward::qa;
using nlohmann::json;

namespace {

// httplib server on an ephemeral loopback port, stopped on destruction.
class LocalServer {
public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

void reply(httplib::Response& res, const json& body) { res.set_content(body.dump(), "application/json"); }

// Lexical provider served over HTTP, so a live session has real answers to record.
void lexical_routes(httplib::Server& s) {
  s.Post("/answer", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    LexicalProvider p;
    reply(res, {{"answer", p.answer({body["passage"], body["question"]})}});
  });
  s.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    LexicalProvider p;
    try {
      reply(res, {{"scores", p.score_choices({body["prompt"], body["choices"]}).scores}});
    } catch (const AbstainError&) {
      reply(res, {{"scores", {0.0, 0.0}}});
    }
  });
}

HttpOptions fast(const std::string& url) {
  HttpOptions o;
  o.url = url;
  o.timeout = std::chrono::milliseconds(2000);
  o.backoff = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST_CASE("lexical answer picks the best-overlap sentence") {
  LexicalProvider p;
  CHECK(p.answer({"The goal is to eat pellets. Ghosts are enemies.", "Who are your enemies?"}) == "Ghosts are enemies.");
  CHECK(p.answer({"The sky is blue. Water is wet.", "Who are your enemies?"}).empty());
  CHECK_THROWS_AS(p.answer({"", "Who are your enemies?"}), PreconditionError);
  CHECK_THROWS_AS(p.answer({"Text.", " "}), PreconditionError);
}

TEST_CASE("lexical answer applies the overlap threshold") {
  LexicalProvider p;
  // Seven content words in the question; one shared word scores 1/7 < 0.15.
  const std::string q = "Which purple dragon guards golden castle treasure today?";
  CHECK(text::content_words(q).size() == 7);
  CHECK(p.answer({"The dragon sleeps.", q}).empty());
  CHECK(p.answer({"The purple dragon sleeps.", q}) == "The purple dragon sleeps.");
}

TEST_CASE("lexical scorer counts cues with the object pair doubled") {
  LexicalProvider p;
  const ChoiceQuery pellet{"Question: What happens when the player hit a pellet? Answer: You score points when you eat a "
                           "pellet.\nQuestion: Should you hit a pellet if you want to win? Answer: ",
                           {"Yes", "No"}};
  const auto s = p.score_choices(pellet);
  CHECK(s.scores == std::vector<double>{6.0, 0.0});
  CHECK(s.best() == 0);

  const ChoiceQuery ghost{"Question: Who are your enemies? Answer: Ghosts. eat the dots.\nQuestion: What happens when the "
                          "player hit a ghost? Answer: You lose a life.\nQuestion: Should you hit a ghost if you want "
                          "to win? Answer: ",
                          {"Yes", "No"}};
  CHECK(p.score_choices(ghost).scores == std::vector<double>{1.0, 2.0});

  CHECK_THROWS_AS(p.score_choices({"Question: Q? Answer: The sky is blue.", {"Yes", "No"}}), AbstainError);
  CHECK_THROWS_AS(p.score_choices({"x", {"A", "B", "C"}}), PreconditionError);
}

TEST_CASE("cue matching accepts regular inflections only") {
  CHECK(LexicalProvider::matches_cue("scores", "score"));
  CHECK(LexicalProvider::matches_cue("eating", "eat"));
  CHECK(LexicalProvider::matches_cue("losing", "lose"));
  CHECK(LexicalProvider::matches_cue("avoided", "avoid"));
  CHECK_FALSE(LexicalProvider::matches_cue("eaten", "eat"));
  CHECK_FALSE(LexicalProvider::matches_cue("scoreboard", "score"));
  CHECK(LexicalProvider::negative_cues().size() == 9);
  CHECK(LexicalProvider::positive_cues().size() == 7);
}

TEST_CASE("choice ties resolve to the earliest choice") {
  CHECK(ChoiceScores{{1.0, 1.0}}.best() == 0);
  CHECK(ChoiceScores{{0.5, 2.0}}.best() == 1);
  CHECK_THROWS_AS(ChoiceScores{}.best(), PreconditionError);
}

TEST_CASE("fixture provider looks up by content hash and reports misses") {
  const json entries = json::array(
      {{{"kind", "answer"},
        {"passage_sha256", text::sha256_hex("P")},
        {"question_sha256", text::sha256_hex("Q")},
        {"result", "Ghosts"}},
       {{"kind", "score"}, {"prompt_sha256", text::sha256_hex("prompt")}, {"result", {0.2, 0.8}}},
       {{"kind", "score"}, {"prompt_sha256", text::sha256_hex("zero")}, {"result", {0.0, 0.0}}}});
  FixtureProvider p(entries);
  CHECK(p.answer({"P", "Q"}) == "Ghosts");
  CHECK_THROWS_AS(p.answer({"P", "other"}), FixtureMissError);
  CHECK(p.score_choices({"prompt", {"Yes", "No"}}).scores == std::vector<double>{0.2, 0.8});
  CHECK_THROWS_AS(p.score_choices({"zero", {"Yes", "No"}}), AbstainError);
  CHECK_THROWS_AS(p.score_choices({"unseen", {"Yes", "No"}}), FixtureMissError);
  CHECK_THROWS_AS(FixtureProvider(json::object()), ConfigError);
  CHECK_THROWS_AS(FixtureProvider(json::array({{{"kind", "guess"}}})), ConfigError);
  CHECK_THROWS_AS(FixtureProvider::load("/nonexistent/fixture.json"), ConfigError);
}

TEST_CASE("make_provider parses provider specs") {
  CHECK(make_provider("lexical")->name() == "lexical");
  CHECK(make_provider("fixture:" + (harness::data_dir() / "fixtures" / "pacman_wiki.json").string())->name() ==
        "fixture");
  CHECK(make_provider("http:http://127.0.0.1:1")->name() == "http");
  CHECK_THROWS_AS(make_provider("macaw"), ConfigError);
  CHECK_THROWS_AS(make_provider("http:ftp://host"), ConfigError);
}

TEST_CASE("http provider answers and scores over the wire") {
  LocalServer server(lexical_routes);
  HttpProvider p(fast(server.url()));
  CHECK(p.answer({"The goal is to eat pellets. Ghosts are enemies.", "Who are your enemies?"}) == "Ghosts are enemies.");
  const auto s = p.score_choices({"Question: Q? Answer: You score points.", {"Yes", "No"}});
  CHECK(s.scores == std::vector<double>{2.0, 0.0});
  CHECK_THROWS_AS(p.score_choices({"Question: Q? Answer: Nothing here.", {"Yes", "No"}}), AbstainError);
}

TEST_CASE("http provider maps failures to transport errors") {
  LocalServer server([](httplib::Server& s) {
    s.Post("/answer", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    s.Post("/score", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(300));
      reply(res, {{"scores", {1.0, 0.0}}});
    });
  });
  auto opts = fast(server.url());
  opts.retries = 0;
  opts.timeout = std::chrono::milliseconds(50);
  HttpProvider p(opts);
  CHECK_THROWS_AS(p.answer({"P", "Q"}), TransportError);
  CHECK_THROWS_AS(p.score_choices({"prompt", {"Yes", "No"}}), TransportError);

  HttpProvider unreachable(fast("http://127.0.0.1:1"));
  CHECK_THROWS_AS(unreachable.answer({"P", "Q"}), TransportError);
}

TEST_CASE("http provider retries transient failures") {
  std::atomic<int> calls{0};
  LocalServer server([&](httplib::Server& s) {
    s.Post("/answer", [&](const httplib::Request&, httplib::Response& res) {
      if (++calls <= 2) {
        res.status = 500;
        return;
      }
      reply(res, {{"answer", "ok"}});
    });
  });
  auto opts = fast(server.url());
  opts.retries = 2;
  CHECK(HttpProvider(opts).answer({"P", "Q"}) == "ok");
  CHECK(calls == 3);

  calls = 0;
  opts.retries = 1;
  CHECK_THROWS_AS(HttpProvider(opts).answer({"P", "Q"}), TransportError);
  CHECK(calls == 2);
}

TEST_CASE("http provider caps in-flight requests") {
  std::atomic<int> live{0};
  std::atomic<int> peak{0};
  LocalServer server([&](httplib::Server& s) {
    s.Post("/answer", [&](const httplib::Request&, httplib::Response& res) {
      const int now = ++live;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(40));
      --live;
      reply(res, {{"answer", "a"}});
    });
  });
  auto opts = fast(server.url());
  opts.max_in_flight = 2;
  HttpProvider p(opts);
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 6; ++i) {
    futures.push_back(std::async(std::launch::async, [&p, i] { return p.answer({"P" + std::to_string(i), "Q"}); }));
  }
  for (auto& f : futures) CHECK(f.get() == "a");
  CHECK(peak <= 2);
  CHECK(peak >= 1);
}

TEST_CASE("READWARD_QA_URL overrides the configured url") {
  LocalServer server(lexical_routes);
  ::setenv("READWARD_QA_URL", server.url().c_str(), 1);
  auto p = make_provider("http:http://127.0.0.1:1");
  ::unsetenv("READWARD_QA_URL");
  CHECK(p->answer({"Ghosts are enemies.", "Who are your enemies?"}) == "Ghosts are enemies.");
}

TEST_CASE("recording an http session and replaying it reproduces the context file byte for byte") {
  LocalServer server(lexical_routes);
  testing::TempDir dir;
  const auto raw = harness::read_text_file(harness::default_manual("dot_maze"));
  harness::ReadOptions ro;
  ro.game = "dot_maze";

  auto recorder = std::make_shared<RecordingProvider>(std::make_shared<HttpProvider>(fast(server.url())));
  const auto live = manual::to_json(harness::read_manual(*recorder, raw, ro)).dump(2);
  recorder->save(dir / "fixture.json");

  auto replay = FixtureProvider::load(dir / "fixture.json");
  const auto replayed = manual::to_json(harness::read_manual(replay, raw, ro)).dump(2);
  CHECK(replayed == live);

  LexicalProvider lexical;
  CHECK(manual::to_json(harness::read_manual(lexical, raw, ro)).dump(2) == live);
}

TEST_CASE("recording keeps abstentions so replay abstains too") {
  auto recorder = std::make_shared<RecordingProvider>(std::make_shared<LexicalProvider>());
  CHECK_THROWS_AS(recorder->score_choices({"Question: Q? Answer: blue.", {"Yes", "No"}}), AbstainError);
  FixtureProvider replay(recorder->entries());
  CHECK_THROWS_AS(replay.score_choices({"Question: Q? Answer: blue.", {"Yes", "No"}}), AbstainError);
}
