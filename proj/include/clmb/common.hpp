#ifndef CLMB_COMMON_HPP
#define CLMB_COMMON_HPP

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace clmb {

/* Bad or inconsistent user input: maps to exit code 2 at the CLI. */
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/* Numerical failure (non-finite values, degenerate calibration, ...): exit code 3. */
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

void set_log_level(LogLevel lvl);
void set_log_level(const std::string& name);
LogLevel log_level();
void log_msg(LogLevel lvl, const std::string& msg);
inline void log_debug(const std::string& m) { log_msg(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log_msg(LogLevel::Error, m); }

/* Worker count used by the parallel kernel dispatchers. 0 means "use the
   OpenMP default". A value of 1 selects the serial reference path. */
void set_thread_count(int n);
int thread_count();
bool parallel_enabled();

constexpr std::uint64_t FNV_OFFSET = 0xcbf29ce484222325ULL;
constexpr std::uint64_t FNV_PRIME = 0x100000001b3ULL;

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = FNV_OFFSET) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= FNV_PRIME;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = FNV_OFFSET) {
    return fnv1a(s.data(), s.size(), h);
}

/* Streaming FNV-1a over a file's bytes; throws input_error if unreadable. */
std::uint64_t hash_file(const std::string& path);

std::string fmt_g(double v, int precision = 17);

} // namespace clmb

#endif
