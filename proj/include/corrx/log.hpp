#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace corrx {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Verbosity from the CORRX_LOG environment variable (quiet|info|debug).
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("CORRX_LOG");
    if (!env) return LogLevel::info;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::quiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

template <class... Args>
void log_info(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::info) {
    if constexpr (sizeof...(Args) == 0)
      std::fputs(fmt, stderr);
    else
      std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
  }
}

template <class... Args>
void log_debug(const char* fmt, Args... args) {
  if (log_level() >= LogLevel::debug) {
    if constexpr (sizeof...(Args) == 0)
      std::fputs(fmt, stderr);
    else
      std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
  }
}

}  // namespace corrx
