#include "iduqa/common.h"

#include <iostream>

namespace iduqa {

namespace {
LogLevel g_level = LogLevel::warning;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warning: return "warning";
        case LogLevel::error: return "error";
        case LogLevel::off: return "off";
    }
    return "?";
}
} // namespace

void set_log_level(LogLevel level) { g_level = level; }

LogLevel log_level() { return g_level; }

LogLevel parse_log_level(const std::string& name) {
    if (name == "debug") return LogLevel::debug;
    if (name == "info") return LogLevel::info;
    if (name == "warning" || name == "warn") return LogLevel::warning;
    if (name == "error") return LogLevel::error;
    if (name == "off") return LogLevel::off;
    throw Error("unknown log level '" + name + "'");
}

void log_message(LogLevel level, const std::string& message) {
    if (level < g_level) return;
    std::cerr << "[" << level_name(level) << "] " << message << "\n";
}

} // namespace iduqa
