#pragma once

#include <string>

namespace yfs {

// Diagnostic logging to stderr, controlled by the YFS_LOG environment
// variable: unset/empty = quiet, "info", or "debug".
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace yfs
