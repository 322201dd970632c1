#pragma once

#include <functional>

namespace kgen {

void set_thread_count(int threads);
int thread_count();

// Runs body(c) for c in [0, chunks). The partition never depends on the
// number of workers, so per-chunk partial results reduce identically.
void parallel_chunks(int chunks, const std::function<void(int)>& body);

}  // namespace kgen
