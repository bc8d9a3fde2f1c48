#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sirtail {

// Runs n replicates in fixed blocks and returns one partial per block,
// in block order. Threads pull blocks dynamically, but because every
// block is reduced on its own and the caller combines partials in block
// order, the final result is independent of the thread count.
template <class Partial, class BlockFn>
std::vector<Partial> run_blocks(std::uint64_t n, std::uint64_t block_size, int threads,
                                BlockFn&& fn)
{
    const std::uint64_t n_blocks = block_size ? (n + block_size - 1) / block_size : 0;
    std::vector<Partial> partials(n_blocks);
    if (n_blocks == 0)
        return partials;
    if (threads < 1)
        threads = 1;

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks)
                return;
            const std::uint64_t begin = b * block_size;
            const std::uint64_t end = std::min(n, begin + block_size);
            try {
                partials[b] = fn(b, begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);
    return partials;
}

} // namespace sirtail
