#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace swgame {

// Runs fn(begin, end) over a static partition of [0, n). Work items must be
// independent; results therefore do not depend on the thread count. If several
// chunks throw, the error from the lowest chunk is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers <= 1) {
        if (n > 0) fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, &errors, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace swgame
