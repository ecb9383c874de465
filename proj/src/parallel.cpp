#include "wke/parallel.hpp"

#include <algorithm>
#include <omp.h>

namespace wke {

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

std::vector<std::size_t> balanced_chunks(const std::vector<std::size_t>& prefix, int chunk_count) {
    const std::size_t items = prefix.empty() ? 0 : prefix.size() - 1;
    const std::size_t total = items == 0 ? 0 : prefix.back();
    std::vector<std::size_t> bounds(static_cast<std::size_t>(chunk_count) + 1, items);
    bounds[0] = 0;
    for (int c = 1; c < chunk_count; ++c) {
        const std::size_t target = total * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunk_count);
        const auto it = std::lower_bound(prefix.begin(), prefix.end(), target);
        bounds[c] = std::max(bounds[c - 1], static_cast<std::size_t>(it - prefix.begin()));
        bounds[c] = std::min(bounds[c], items);
    }
    return bounds;
}

}  // namespace wke
