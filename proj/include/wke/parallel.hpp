#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace wke {

/// Execution path of the quadrature kernels. Parallel splits the work into a
/// fixed number of chunks (independent of the thread count) whose partial sums
/// are merged in chunk order, so results do not depend on the number of threads.
/// Serial is the plain reference loop kept for testing and benchmarking.
enum class Exec { Parallel, Serial };

void set_thread_count(int threads);
int thread_count();

/// Chunk boundaries for `items` work units with cumulative cost `prefix`
/// (prefix.size() == items + 1). Returns chunk_count + 1 boundaries.
std::vector<std::size_t> balanced_chunks(const std::vector<std::size_t>& prefix, int chunk_count);

/// Runs body(c) for c in [0, chunks) on the OpenMP team.
template <class Body>
void for_each_chunk(int chunks, Body&& body) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < chunks; ++c) body(c);
}

}  // namespace wke
