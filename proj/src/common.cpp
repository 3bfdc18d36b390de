#include "clmb/common.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace clmb {

static std::atomic<int> g_log_level{static_cast<int>(LogLevel::Info)};
static std::atomic<int> g_threads{0};
static std::mutex g_log_mutex;

void set_log_level(LogLevel lvl) { g_log_level.store(static_cast<int>(lvl)); }

void set_log_level(const std::string& name) {
    if (name == "debug") set_log_level(LogLevel::Debug);
    else if (name == "info") set_log_level(LogLevel::Info);
    else if (name == "warn") set_log_level(LogLevel::Warn);
    else if (name == "error") set_log_level(LogLevel::Error);
    else throw input_error("unknown log level: " + name);
}

LogLevel log_level() { return static_cast<LogLevel>(g_log_level.load()); }

void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) < g_log_level.load()) return;
    static const char* tags[] = {"DEBUG", "INFO", "WARN", "ERROR"};
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "[" << tags[static_cast<int>(lvl)] << "] " << msg << "\n";
}

void set_thread_count(int n) {
    g_threads.store(n);
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

int thread_count() {
    int n = g_threads.load();
    if (n > 0) return n;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

bool parallel_enabled() {
#ifdef _OPENMP
    return thread_count() != 1;
#else
    return false;
#endif
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file for hashing: " + path);
    std::uint64_t h = FNV_OFFSET;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a(buf, static_cast<std::size_t>(got), h);
    }
    return h;
}

std::string fmt_g(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

} // namespace clmb
