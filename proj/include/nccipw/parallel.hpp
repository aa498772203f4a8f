#pragma once

#include <cstddef>
#include <functional>

namespace ncc {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Each index runs exactly once; callers write results into
/// per-index slots so output does not depend on scheduling. The exception
/// thrown by the lowest failing index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace ncc
