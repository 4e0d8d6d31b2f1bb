#include <atomic>
#include <cstdlib>
#include <string>

#include "specfuse/error.hpp"
#include "specfuse/kern/kernels.hpp"

namespace specfuse::kern {
namespace {

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

Backend best_available() {
#if defined(__x86_64__) || defined(__i386__)
    if (avx2_supported())
        return Backend::Avx2;
#endif
#if defined(__aarch64__)
    return Backend::Neon;
#endif
    return Backend::Scalar;
}

const KernelTable& table_for(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return scalar_table();
    case Backend::Avx2:
#if defined(__x86_64__) || defined(__i386__)
        if (avx2_supported())
            return avx2_table();
        throw_user("kernel backend 'avx2' is not supported on this CPU");
#else
        throw_user("kernel backend 'avx2' is not available in this build");
#endif
    case Backend::Neon:
#if defined(__aarch64__)
        return neon_table();
#else
        throw_user("kernel backend 'neon' is not available in this build");
#endif
    }
    throw_internal("unknown kernel backend");
}

Backend initial_backend() {
    const char* env = std::getenv("SPECFUSE_KERNELS");
    if (!env || std::string(env) == "auto" || std::string(env).empty())
        return best_available();
    const std::string s(env);
    if (s == "scalar")
        return Backend::Scalar;
    if (s == "avx2")
        return Backend::Avx2;
    if (s == "neon")
        return Backend::Neon;
    throw_user("SPECFUSE_KERNELS must be one of auto|scalar|avx2|neon, got '" + s + "'");
}

void ensure_init() {
    if (g_active.load(std::memory_order_acquire))
        return;
    const Backend b = initial_backend();
    const KernelTable& t = table_for(b);
    g_backend.store(b, std::memory_order_relaxed);
    g_active.store(&t, std::memory_order_release);
}

} // namespace

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    }
    return "?";
}

const KernelTable& active() {
    ensure_init();
    return *g_active.load(std::memory_order_acquire);
}

Backend active_backend() {
    ensure_init();
    return g_backend.load(std::memory_order_relaxed);
}

void set_backend(Backend b) {
    const KernelTable& t = table_for(b);
    g_backend.store(b, std::memory_order_relaxed);
    g_active.store(&t, std::memory_order_release);
}

} // namespace specfuse::kern
