#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pathgap {

/// Paths per reduction block. Fixed so results never depend on the worker count.
inline constexpr std::size_t kReductionBlock = 256;

[[nodiscard]] inline int resolve_threads(int requested) noexcept
{
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Fold items [0, n) into accumulators, one per fixed-size block, then merge the
/// blocks in index order. `body(acc, k)` must depend only on k.
template <class Acc, class Body>
[[nodiscard]] Acc deterministic_reduce(std::size_t n, int threads, Body&& body, std::size_t block = kReductionBlock)
{
    const std::size_t n_blocks = (n + block - 1) / block;
    std::vector<Acc> partial(n_blocks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                const std::size_t end = std::min(n, (b + 1) * block);
                for (std::size_t k = b * block; k < end; ++k) body(partial[b], k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(n_blocks)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc total{};
    for (auto& p : partial) total.merge(p);
    return total;
}

}  // namespace pathgap
