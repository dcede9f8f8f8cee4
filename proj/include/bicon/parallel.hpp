#ifndef BICON_PARALLEL_HPP
#define BICON_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace bicon {

// worker count: BICON_THREADS when set, hardware concurrency otherwise
int default_thread_count();

// Runs fn(i) for i in [0, count), possibly concurrently.  Results must be
// written to per-index slots; reductions stay with the caller so reports are
// deterministic regardless of scheduling.  The first exception (by lowest
// index) is rethrown after all workers join.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace bicon

#endif
