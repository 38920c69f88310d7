#pragma once

#include <cstddef>
#include <functional>

namespace fif {

/// Runs `chunk(begin, end)` over disjoint chunks of [begin, end), using up to
/// hardware_concurrency threads (or `max_workers` when nonzero). Small ranges
/// run inline on the caller.
void parallel_for_chunks(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t, std::size_t)>& chunk,
                         std::size_t min_chunk = 8192, std::size_t max_workers = 0);

}  // namespace fif
