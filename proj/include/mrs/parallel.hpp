#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mrs {

// Runs fn(i) for i in [0, count) on at most `width` threads. Tasks must not
// share mutable state. If any task throws, the exception of the lowest
// failing index is rethrown after all workers have joined.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t width, Fn&& fn) {
    if (count == 0) return;
    width = std::clamp<std::size_t>(width, 1, count);
    std::vector<std::exception_ptr> errors(count);
    if (width == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(width - 1);
        for (std::size_t t = 1; t < width; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace mrs
