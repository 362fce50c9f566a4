#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "readward/errors.hpp"
#include "readward/harness.hpp"

#ifndef READWARD_DATA_DIR
#define READWARD_DATA_DIR "data"
#endif

namespace readward::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Arms arms) {
  switch (arms) {
    case Arms::both: return "both";
    case Arms::baseline: return "baseline";
    case Arms::assisted: return "assisted";
  }
  return "both";
}

Arms parse_arms(const std::string& s) {
  if (s == "both") return Arms::both;
  if (s == "baseline") return Arms::baseline;
  if (s == "assisted") return Arms::assisted;
  throw ConfigError("unknown arms '" + s + "' (expected both, baseline or assisted)");
}

void RunConfig::validate() const {
  env::parse_game(game);
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set(seeds.begin(), seeds.end()).size() != seeds.size()) throw ConfigError("seeds must be distinct");
  if (steps <= 0) throw ConfigError("steps must be positive");
  if (episode_cap <= 0) throw ConfigError("episode_cap must be positive");
  if (window <= 0) throw ConfigError("window must be positive");
  if (top_k <= 0) throw ConfigError("top_k must be positive");
  if (max_tokens < 32) throw ConfigError("max_tokens must be at least 32");
  if (arms != Arms::baseline) reason::validate_scales(r_p, r_n);
  if (noise) noise->validate();
}

json RunConfig::to_json() const {
  return {{"game", game},
          {"agent", agents::to_string(agent)},
          {"delayed", delayed},
          {"manual", manual.empty() ? default_manual(game).filename().string() : manual.filename().string()},
          {"source", manual::to_string(source_tag)},
          {"provider", provider},
          {"noise", noise ? noise->to_string() : ""},
          {"seeds", seeds},
          {"steps", steps},
          {"r_p", r_p},
          {"r_n", r_n},
          {"arms", to_string(arms)},
          {"episode_cap", episode_cap},
          {"window", window},
          {"top_k", top_k},
          {"max_tokens", max_tokens},
          {"clip_rewards", clip_rewards},
          {"objects", objects},
          {"env", env_params}};
}

namespace {

template <typename T>
T get(const toml::node& node, const std::string& key) {
  if (auto v = node.value<T>()) return *v;
  throw ConfigError("config key '" + key + "' has the wrong type");
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

RunConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }

  RunConfig c;
  for (const auto& [k, node] : tbl) {
    const std::string key(k.str());
    if (key == "game") {
      c.game = get<std::string>(node, key);
    } else if (key == "agent") {
      c.agent = agents::parse_agent(get<std::string>(node, key));
    } else if (key == "delayed") {
      c.delayed = get<bool>(node, key);
    } else if (key == "manual") {
      c.manual = resolve(get<std::string>(node, key), base_dir);
    } else if (key == "source") {
      c.source_tag = manual::parse_source_tag(get<std::string>(node, key));
    } else if (key == "provider") {
      c.provider = get<std::string>(node, key);
    } else if (key == "noise") {
      const auto spec = get<std::string>(node, key);
      if (!spec.empty() && spec != "none") c.noise = interact::NoiseModel::parse(spec);
    } else if (key == "seeds") {
      const auto* arr = node.as_array();
      if (!arr) throw ConfigError("config key 'seeds' must be an array");
      c.seeds.clear();
      for (const auto& s : *arr) {
        const auto v = get<std::int64_t>(s, key);
        if (v < 0) throw ConfigError("seeds must be non-negative");
        c.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    } else if (key == "steps") {
      c.steps = get<std::int64_t>(node, key);
    } else if (key == "r_p") {
      c.r_p = get<double>(node, key);
    } else if (key == "r_n") {
      c.r_n = get<double>(node, key);
    } else if (key == "out") {
      c.out = resolve(get<std::string>(node, key), base_dir);
    } else if (key == "plot") {
      c.plot = get<bool>(node, key);
    } else if (key == "arms") {
      c.arms = parse_arms(get<std::string>(node, key));
    } else if (key == "episode_cap") {
      c.episode_cap = static_cast<int>(get<std::int64_t>(node, key));
    } else if (key == "window") {
      c.window = static_cast<int>(get<std::int64_t>(node, key));
    } else if (key == "top_k") {
      c.top_k = static_cast<int>(get<std::int64_t>(node, key));
    } else if (key == "max_tokens") {
      c.max_tokens = static_cast<int>(get<std::int64_t>(node, key));
    } else if (key == "clip_rewards") {
      c.clip_rewards = get<bool>(node, key);
    } else if (key == "objects") {
      const auto* arr = node.as_array();
      if (!arr) throw ConfigError("config key 'objects' must be an array");
      for (const auto& o : *arr) c.objects.push_back(get<std::string>(o, key));
    } else if (key == "env") {
      const auto* t = node.as_table();
      if (!t) throw ConfigError("config key 'env' must be a table");
      for (const auto& [pk, pv] : *t) c.env_params[std::string(pk.str())] = get<double>(pv, "env." + std::string(pk.str()));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

fs::path data_dir() {
  if (const char* d = std::getenv("READWARD_DATA")) return d;
  return READWARD_DATA_DIR;
}

fs::path default_manual(const std::string& game) { return data_dir() / "manuals" / (game + ".txt"); }

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace readward::harness
