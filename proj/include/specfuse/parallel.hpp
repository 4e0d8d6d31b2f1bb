#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace specfuse {

/// Worker count resolution: explicit request, else SPECFUSE_WORKERS, else
/// hardware concurrency (at least 1).
std::size_t resolve_workers(std::size_t requested = 0);

/// Runs fn(begin, end) over contiguous chunks of [0, n). The partitioning
/// must never change results; callers rely on chunk-independent kernels.
void parallel_chunks(std::size_t n, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace specfuse
