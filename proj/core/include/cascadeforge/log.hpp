#pragma once

#include <string>

namespace cascadeforge::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

// Active level comes from the CASCADEFORGE_LOG environment variable
// (debug|info|warn|error), defaulting to warn.
Level active_level();
void set_level(Level level);

bool enabled(Level level);
void write(Level level, const std::string& msg);

inline void debug(const std::string& msg) { write(Level::debug, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void error(const std::string& msg) { write(Level::error, msg); }

}  // namespace cascadeforge::log
