#pragma once

#include <cstddef>
#include <functional>

namespace nhl {

/// Worker count: the `NHL_THREADS` environment variable when set and positive, else the
/// hardware concurrency.
int default_thread_count();

/// Runs `body(begin, end)` over contiguous blocks of [0, count) on up to `threads` workers.
/// Blocks are disjoint; the call returns once every block is done. Exceptions thrown by a
/// worker are rethrown on the calling thread (the first one wins).
void parallel_for_blocks(std::size_t count, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nhl
