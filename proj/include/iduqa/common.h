#pragma once

#include <stdexcept>
#include <string>

namespace iduqa {

/// Version stamp written into dataset and report files.
inline constexpr const char* dataset_file_version = "1.0.0";

/// Error type thrown by every loader/validator in the library. Messages name
/// the offending field, file, or sample id.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LogLevel { debug = 0, info = 1, warning = 2, error = 3, off = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();
LogLevel parse_log_level(const std::string& name);

void log_message(LogLevel level, const std::string& message);

inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_warning(const std::string& m) { log_message(LogLevel::warning, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::error, m); }

} // namespace iduqa
