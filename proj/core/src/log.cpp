#include "fts/log.h"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "fts/error.h"

namespace fts {

const char* error_code_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::argument:
      return "ARGUMENT_ERROR";
    case ErrorKind::config:
      return "CONFIG_ERROR";
    case ErrorKind::data:
      return "DATA_ERROR";
    case ErrorKind::numeric:
      return "NUMERIC_ERROR";
  }
  return "UNKNOWN_ERROR";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::argument:
    case ErrorKind::config:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::numeric:
      return 4;
  }
  return 1;
}

namespace log {
namespace {

std::optional<Level>& override_level() {
  static std::optional<Level> level;
  return level;
}

Level from_env() {
  const char* raw = std::getenv("FTS_LOG");
  if (raw == nullptr) return Level::warn;
  const std::string value(raw);
  if (value == "debug") return Level::debug;
  if (value == "info") return Level::info;
  if (value == "quiet") return Level::quiet;
  return Level::warn;
}

void emit(Level level, const char* tag, std::string_view msg) {
  if (static_cast<int>(level) < static_cast<int>(threshold())) return;
  std::cerr << "[" << tag << "] " << msg << '\n';
}

}  // namespace

Level threshold() {
  if (override_level()) return *override_level();
  static const Level env_level = from_env();
  return env_level;
}

void set_threshold(Level level) { override_level() = level; }

void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void warn(std::string_view msg) { emit(Level::warn, "warn", msg); }

}  // namespace log
}  // namespace fts
