#include "attx/diag.hpp"

#include <atomic>
#include <cstdio>

namespace attx {

namespace {
std::atomic<long> g_warnings{0};
}

void warn(const std::string& msg) {
    g_warnings.fetch_add(1, std::memory_order_relaxed);
    std::fprintf(stderr, "attx: warning: %s\n", msg.c_str());
}

long warning_count() { return g_warnings.load(std::memory_order_relaxed); }

}  // namespace attx
