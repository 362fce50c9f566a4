#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "readward/errors.hpp"
#include "readward/harness.hpp"

namespace readward::harness {

using nlohmann::json;

namespace {

std::vector<const EpisodeTrace*> complete_episodes(std::span<const EpisodeTrace> episodes) {
  std::vector<const EpisodeTrace*> out;
  for (const auto& e : episodes) {
    if (e.complete) out.push_back(&e);
  }
  return out;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double final_score(std::span<const EpisodeTrace> episodes, int window) {
  const auto done = complete_episodes(episodes);
  if (done.empty()) throw PreconditionError("no complete episode to score");
  const size_t n = std::min(done.size(), static_cast<size_t>(window));
  double s = 0.0;
  for (size_t i = done.size() - n; i < done.size(); ++i) s += env::game_score(*done[i]);
  return s / static_cast<double>(n);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("pearson needs two equal columns of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> correlation(std::span<const EpisodeTrace> episodes, int window) {
  if (window <= 0) throw PreconditionError("correlation window must be positive");
  const auto done = complete_episodes(episodes);
  const size_t windows = done.size() / static_cast<size_t>(window);
  if (windows < 2) throw PreconditionError("correlation needs at least two full windows of episodes");
  std::vector<double> aux(windows, 0.0), score(windows, 0.0);
  for (size_t w = 0; w < windows; ++w) {
    for (size_t i = w * static_cast<size_t>(window); i < (w + 1) * static_cast<size_t>(window); ++i) {
      aux[w] += done[i]->aux_sum();
      score[w] += env::game_score(*done[i]);
    }
  }
  return pearson(aux, score);
}

std::string curves_csv(std::span<const EpisodeTrace> episodes) {
  std::string out = "step,episode,score,aux_sum\n";
  for (const auto& e : episodes) {
    if (!e.complete) continue;
    out += std::to_string(e.end_step()) + "," + std::to_string(e.episode) + "," + number(env::game_score(e)) + "," +
           number(e.aux_sum()) + "\n";
  }
  return out;
}

std::vector<CurvePoint> learning_curve(std::span<const EpisodeTrace> episodes, long total_steps, int window,
                                       int points) {
  if (points <= 0 || window <= 0 || total_steps <= 0) throw PreconditionError("learning_curve: bad arguments");
  const auto done = complete_episodes(episodes);
  std::vector<CurvePoint> curve;
  size_t upto = 0;
  for (int i = 1; i <= points; ++i) {
    const long at = total_steps * i / points;
    while (upto < done.size() && done[upto]->end_step() <= at) ++upto;
    if (upto == 0) continue;
    const size_t n = std::min(upto, static_cast<size_t>(window));
    double s = 0.0;
    for (size_t k = upto - n; k < upto; ++k) s += env::game_score(*done[k]);
    curve.push_back({at, s / static_cast<double>(n)});
  }
  return curve;
}

std::vector<CurvePoint> mean_curve(std::span<const std::vector<CurvePoint>> curves) {
  if (curves.empty()) return {};
  std::vector<CurvePoint> out;
  for (const auto& p : curves.front()) {
    double s = 0.0;
    bool everywhere = true;
    for (const auto& c : curves) {
      auto it = std::find_if(c.begin(), c.end(), [&](const CurvePoint& q) { return q.step == p.step; });
      if (it == c.end()) {
        everywhere = false;
        break;
      }
      s += it->score;
    }
    if (everywhere) out.push_back({p.step, s / static_cast<double>(curves.size())});
  }
  return out;
}

void ArmReport::summarise() {
  std::vector<double> v;
  for (const auto& s : seeds) {
    if (s.ok) v.push_back(s.final_score);
  }
  mean = std = 0.0;
  if (v.empty()) return;
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  std = std::sqrt(ss / static_cast<double>(v.size()));
}

const ArmReport* RunReport::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.arm == name) return &a;
  }
  return nullptr;
}

const ArmReport& RunReport::primary() const {
  if (const auto* a = arm("assisted")) return *a;
  if (const auto* b = arm("baseline")) return *b;
  throw ConfigError("report has no arms");
}

bool RunReport::all_ok() const {
  return failures.empty() && std::all_of(arms.begin(), arms.end(), [](const ArmReport& a) {
           return std::all_of(a.seeds.begin(), a.seeds.end(), [](const SeedResult& s) { return s.ok; });
         });
}

namespace {

json curve_json(const std::vector<CurvePoint>& c) {
  json arr = json::array();
  for (const auto& p : c) arr.push_back({p.step, p.score});
  return arr;
}

std::vector<CurvePoint> curve_from_json(const json& j) {
  std::vector<CurvePoint> c;
  for (const auto& p : j) c.push_back({p.at(0).get<long>(), p.at(1).get<double>()});
  return c;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const RunReport& r) {
  json arms = json::array();
  for (const auto& a : r.arms) {
    json seeds = json::array();
    for (const auto& s : a.seeds) {
      json sj = {{"seed", s.seed}, {"status", s.ok ? "ok" : "failed"}};
      if (s.ok) {
        sj["final_score"] = s.final_score;
        sj["episodes"] = s.episodes;
        sj["correlation"] = optional_number(s.correlation);
        sj["curves"] = s.curves;
      } else {
        sj["error"] = s.error;
        sj["error_kind"] = s.error_kind;
      }
      seeds.push_back(std::move(sj));
    }
    arms.push_back({{"arm", a.arm}, {"mean", a.mean}, {"std", a.std}, {"seeds", seeds}, {"curve", curve_json(a.curve)}});
  }
  return {{"version", 1},  {"game", r.game},       {"agent", r.agent},       {"steps", r.steps},
          {"window", r.window}, {"config", r.config}, {"rewards", r.rewards}, {"failures", r.failures},
          {"arms", arms}};
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.game = j.at("game").get<std::string>();
    r.agent = j.at("agent").get<std::string>();
    r.steps = j.at("steps").get<long>();
    r.window = j.value("window", 50);
    r.config = j.value("config", json::object());
    r.rewards = j.value("rewards", json());
    r.failures = j.value("failures", std::vector<std::string>{});
    for (const auto& aj : j.at("arms")) {
      ArmReport a;
      a.arm = aj.at("arm").get<std::string>();
      a.mean = aj.at("mean").get<double>();
      a.std = aj.at("std").get<double>();
      a.curve = curve_from_json(aj.at("curve"));
      for (const auto& sj : aj.at("seeds")) {
        SeedResult s;
        s.seed = sj.at("seed").get<std::uint64_t>();
        s.ok = sj.at("status").get<std::string>() == "ok";
        if (s.ok) {
          s.final_score = sj.at("final_score").get<double>();
          s.episodes = sj.at("episodes").get<int>();
          if (!sj.at("correlation").is_null()) s.correlation = sj.at("correlation").get<double>();
          s.curves = sj.value("curves", "");
        } else {
          s.error = sj.value("error", "");
          s.error_kind = sj.value("error_kind", "other");
        }
        a.seeds.push_back(std::move(s));
      }
      r.arms.push_back(std::move(a));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::optional<long> first_reach(std::span<const CurvePoint> curve, double level) {
  const double tol = 1e-12 * std::max(1.0, std::abs(level));
  for (const auto& p : curve) {
    if (p.score >= level - tol) return p.step;
  }
  return std::nullopt;
}

std::optional<double> speedup_ratio(std::span<const CurvePoint> reference, std::span<const CurvePoint> candidate) {
  if (reference.empty()) throw PreconditionError("speed-up needs a non-empty reference curve");
  const double level = reference.back().score;
  const auto t_ref = first_reach(reference, level);
  const auto t_cand = first_reach(candidate, level);
  if (!t_cand || *t_cand <= 0) return std::nullopt;
  return static_cast<double>(*t_ref) / static_cast<double>(*t_cand);
}

Comparison compare_arms(const std::string& game, const ArmReport& a, const ArmReport& b) {
  Comparison c;
  c.game = game;
  c.mean_a = a.mean;
  c.mean_b = b.mean;
  c.std_a = a.std;
  c.std_b = b.std;
  if (a.mean != 0.0) c.improvement_pct = 100.0 * (b.mean - a.mean) / std::abs(a.mean);
  if (!a.curve.empty()) {
    const double level = a.curve.back().score;
    c.step_a = *first_reach(a.curve, level);
    c.step_b = first_reach(b.curve, level);
    c.speedup = speedup_ratio(a.curve, b.curve);
  }
  return c;
}

Comparison compare(const RunReport& a, const RunReport& b) {
  if (a.game != b.game) throw ConfigError("reports cover different games: " + a.game + " vs " + b.game);
  if (a.steps != b.steps) {
    throw ConfigError("reports use different step budgets: " + std::to_string(a.steps) + " vs " +
                      std::to_string(b.steps));
  }
  return compare_arms(a.game, a.primary(), b.primary());
}

Comparison compare(const RunReport& report) {
  const auto* base = report.arm("baseline");
  const auto* assisted = report.arm("assisted");
  if (!base || !assisted) throw ConfigError("report lacks a baseline or an assisted arm");
  return compare_arms(report.game, *base, *assisted);
}

std::string format_comparison(const Comparison& c, const std::string& label_a, const std::string& label_b) {
  auto fmt = [](const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "game        " << c.game << "\n";
  os << label_a << "  " << fmt("%.2f", c.mean_a) << " +- " << fmt("%.2f", c.std_a) << "\n";
  os << label_b << "  " << fmt("%.2f", c.mean_b) << " +- " << fmt("%.2f", c.std_b) << "\n";
  os << "improvement " << (c.improvement_pct ? fmt("%.1f%%", *c.improvement_pct) : "n/a") << "\n";
  os << "speed-up    " << (c.speedup ? fmt("%.2f", *c.speedup) : "n/a");
  if (c.speedup) os << " (" << c.step_a << " vs " << *c.step_b << " steps)";
  os << "\n";
  return os.str();
}

}  // namespace readward::harness
