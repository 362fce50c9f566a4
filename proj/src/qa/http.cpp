#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "readward/errors.hpp"
#include "readward/log.hpp"
#include "readward/qa_provider.hpp"

namespace readward::qa {

using nlohmann::json;

namespace {

// RAII slot in the in-flight semaphore.
class Slot {
public:
  explicit Slot(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~Slot() { s_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

HttpProvider::HttpProvider(HttpOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, std::min(options_.max_in_flight, 1024))) {
  const auto& url = options_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw ConfigError("http provider needs an http://host[:port][/path] URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (options_.retries < 0) throw ConfigError("http provider: retries must be >= 0");
}

json HttpProvider::post_once(const std::string& path, const std::string& body) {
  Slot slot(in_flight_);
  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(base_path_ + path, body, "application/json");
  if (!res) throw TransportError("POST " + path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("POST " + path + " returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw TransportError("POST " + path + " returned malformed JSON: " + e.what());
  }
}

json HttpProvider::post(const std::string& path, const json& body) {
  const auto payload = body.dump();
  try {
    return post_once(path, payload);
  } catch (const TransportError& first) {
    if (options_.retries == 0) throw;
    log::warn(std::string(first.what()) + "; retrying");
  }
  // Retries go one at a time so a struggling server sees no retry storm.
  std::lock_guard lock(retry_mutex_);
  auto delay = options_.backoff;
  for (int attempt = 1;; ++attempt) {
    std::this_thread::sleep_for(delay);
    try {
      return post_once(path, payload);
    } catch (const TransportError& e) {
      if (attempt >= options_.retries) throw;
      log::warn(std::string(e.what()) + "; retrying");
      delay *= 2;
    }
  }
}

std::string HttpProvider::answer(const ExtractiveQuery& query) {
  const auto reply = post("/answer", json{{"passage", query.passage}, {"question", query.question}});
  if (!reply.contains("answer") || !reply["answer"].is_string()) {
    throw TransportError("/answer reply lacks a string 'answer' field");
  }
  return reply["answer"].get<std::string>();
}

ChoiceScores HttpProvider::score_choices(const ChoiceQuery& query) {
  const auto reply = post("/score", json{{"prompt", query.prompt}, {"choices", query.choices}});
  if (!reply.contains("scores") || !reply["scores"].is_array()) {
    throw TransportError("/score reply lacks a 'scores' array");
  }
  ChoiceScores out;
  for (const auto& s : reply["scores"]) {
    if (!s.is_number() || !std::isfinite(s.get<double>())) throw TransportError("/score returned a non-finite score");
    out.scores.push_back(s.get<double>());
  }
  if (out.scores.size() != query.choices.size()) throw TransportError("/score returned the wrong number of scores");
  if (std::all_of(out.scores.begin(), out.scores.end(), [](double s) { return s == 0.0; })) {
    throw AbstainError("service scored every choice zero");
  }
  return out;
}

std::shared_ptr<Provider> make_provider(const std::string& spec) {
  const char* env_url = std::getenv("READWARD_QA_URL");
  if (spec == "lexical") return std::make_shared<LexicalProvider>();
  if (spec.starts_with("fixture:")) {
    return std::make_shared<FixtureProvider>(FixtureProvider::load(spec.substr(8)));
  }
  if (spec == "http" || spec.starts_with("http:")) {
    HttpOptions opts;
    opts.url = spec == "http" ? "" : spec.substr(5);
    if (env_url && *env_url) opts.url = env_url;
    if (opts.url.empty()) throw ConfigError("provider 'http' needs a URL (http:<url> or READWARD_QA_URL)");
    return std::make_shared<HttpProvider>(opts);
  }
  throw ConfigError("unknown provider '" + spec + "' (expected lexical, fixture:<path> or http:<url>)");
}

}  // namespace readward::qa
