#pragma once

#include <cstddef>
#include <functional>

namespace hhm {

// Number of worker threads used by parallel_for. 0 or 1 runs inline.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, count). Iterations must write only to their own
// output slots; any reduction happens afterwards in index order, so results do
// not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hhm
