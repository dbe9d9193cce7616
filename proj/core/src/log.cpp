#include "cascadeforge/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace cascadeforge::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("CASCADEFORGE_LOG");
  if (env == nullptr) return Level::warn;
  std::string v(env);
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  if (v == "warn") return Level::warn;
  if (v == "error") return Level::error;
  return Level::warn;
}

Level& level_ref() {
  static Level level = parse_env();
  return level;
}

const char* tag(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "?";
}

std::mutex& mutex_ref() {
  static std::mutex m;
  return m;
}

}  // namespace

Level active_level() { return level_ref(); }

void set_level(Level level) { level_ref() = level; }

bool enabled(Level level) {
  return static_cast<int>(level) >= static_cast<int>(level_ref());
}

void write(Level level, const std::string& msg) {
  if (!enabled(level)) return;
  std::lock_guard<std::mutex> lock(mutex_ref());
  std::cerr << "[cascadeforge " << tag(level) << "] " << msg << "\n";
}

}  // namespace cascadeforge::log
