#ifndef BSYNTH_LOG_HPP
#define BSYNTH_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace bsynth::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity comes from BSYNTH_LOG (error|warn|info|debug); default info.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("BSYNTH_LOG");
    if (!env) return Level::info;
    std::string_view v(env);
    if (v == "error" || v == "quiet") return Level::error;
    if (v == "warn") return Level::warn;
    if (v == "debug") return Level::debug;
    return Level::info;
  }();
  return level;
}

inline void write(Level level, std::string_view msg) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static constexpr const char* tags[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[bsynth " << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void error(std::string_view msg) { write(Level::error, msg); }
inline void warn(std::string_view msg) { write(Level::warn, msg); }
inline void info(std::string_view msg) { write(Level::info, msg); }
inline void debug(std::string_view msg) { write(Level::debug, msg); }

}  // namespace bsynth::log

#endif  // BSYNTH_LOG_HPP
