#ifndef STATEPREP_PARALLEL_HPP
#define STATEPREP_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stateprep
{

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are
// claimed dynamically, so fn must write only to slot i of its outputs. The
// first exception thrown by any item is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn)
{
    const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(body);
    }
    body();
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

// Sum of items[lo, hi) by recursive halving; the association order depends
// only on the item count, never on scheduling.
template <typename T>
T pairwise_sum(const std::vector<T> &items, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1) {
        return items[lo];
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(items, lo, mid) + pairwise_sum(items, mid, hi);
}

} // namespace stateprep

#endif // STATEPREP_PARALLEL_HPP
