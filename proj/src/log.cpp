#include "readward/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace readward::log {
namespace {

std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warning";
    case Level::error: return "error";
    case Level::off: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level l, std::string_view message) {
  if (l < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "readward: " << tag(l) << ": " << message << '\n';
}

}  // namespace readward::log
