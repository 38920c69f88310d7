#include "fif/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace fif {

void parallel_for_chunks(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t, std::size_t)>& chunk,
                         std::size_t min_chunk, std::size_t max_workers) {
    const std::size_t total = end > begin ? end - begin : 0;
    if (total == 0) return;
    std::size_t workers = max_workers > 0
                              ? max_workers
                              : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, (total + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        chunk(begin, end);
        return;
    }
    const std::size_t per = (total + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * per;
        const std::size_t hi = std::min(end, lo + per);
        if (lo >= hi) break;
        threads.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace fif
