#pragma once

#include <string_view>

namespace fts::log {

enum class Level { debug = 0, info = 1, warn = 2, quiet = 3 };

// Threshold is read once from FTS_LOG (debug|info|warn|quiet), default warn.
Level threshold();
void set_threshold(Level level);

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);

}  // namespace fts::log
