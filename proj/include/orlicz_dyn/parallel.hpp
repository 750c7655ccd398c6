#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace orlicz_dyn {

/// Worker count: ORLICZ_DYN_THREADS caps it, 0 or unset means hardware concurrency.
inline std::size_t worker_count() {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ORLICZ_DYN_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            // unparsable values fall back to auto
        }
    }
    return hw;
}

/// Runs fn(begin, end, worker) over [0, count) split into contiguous chunks.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_chunks(std::size_t count, Fn&& fn, std::size_t workers = worker_count()) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers <= 1) {
        if (count > 0) fn(std::size_t{0}, count, std::size_t{0});
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(count, w * chunk);
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, begin, end, w] {
            try {
                if (begin < end) fn(begin, end, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace orlicz_dyn
