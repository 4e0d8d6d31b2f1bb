#include "specfuse/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <string>

#include "specfuse/error.hpp"

namespace specfuse {

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("SPECFUSE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (!end || *end != '\0' || v < 1)
            throw_user("SPECFUSE_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_chunks(std::size_t n, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0)
        return;
    if (workers <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    if (workers > n)
        workers = n;

    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;

    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= n)
            break;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace specfuse
