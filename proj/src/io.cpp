#include "yfs/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace yfs {

LogLevel log_level() {
    static const LogLevel lvl = [] {
        const char* v = std::getenv("YFS_LOG");
        if (!v || !*v) return LogLevel::Quiet;
        if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return lvl;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info)
        std::fprintf(stderr, "[yfs] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug)
        std::fprintf(stderr, "[yfs] %s\n", msg.c_str());
}

} // namespace yfs
