#pragma once

#include <cstddef>
#include <functional>

namespace advrand {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are handed
/// out dynamically; fn must only write to per-index state. The first
/// exception thrown by any fn is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// 0 -> std::thread::hardware_concurrency() (at least 1).
std::size_t resolve_workers(std::size_t requested);

}  // namespace advrand
