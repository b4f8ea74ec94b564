#include "attx/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace attx::kernels {

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool avx2_available() { return false; }
const Backend& avx2_backend() {
    throw std::runtime_error("avx2 backend not built for this architecture");
}
#endif

namespace {

const Backend* pick_default() {
    if (const char* env = std::getenv("ATTX_KERNEL")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_backend();
        if (want == "avx2") {
            if (!avx2_available())
                throw std::runtime_error("ATTX_KERNEL=avx2 but CPU lacks AVX2+FMA");
            return &avx2_backend();
        }
        throw std::runtime_error("unknown ATTX_KERNEL value: " + want);
    }
    if (avx2_available()) return &avx2_backend();
    return &scalar_backend();
}

std::atomic<const Backend*>& slot() {
    static std::atomic<const Backend*> b{nullptr};
    return b;
}

}  // namespace

const Backend& active() {
    const Backend* b = slot().load(std::memory_order_acquire);
    if (!b) {
        b = pick_default();
        slot().store(b, std::memory_order_release);
    }
    return *b;
}

void select_backend(const std::string& name) {
    if (name == "scalar") {
        slot().store(&scalar_backend(), std::memory_order_release);
        return;
    }
    if (name == "avx2") {
        if (!avx2_available()) throw std::runtime_error("avx2 backend unavailable on this CPU");
        slot().store(&avx2_backend(), std::memory_order_release);
        return;
    }
    throw std::runtime_error("unknown kernel backend: " + name);
}

}  // namespace attx::kernels
