#pragma once

#include <cstddef>
#include <future>
#include <vector>

namespace semilab {

/// Worker cap: SEMILAB_MAX_WORKERS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_limit();

/// Applies fn to 0..count-1 using at most worker_limit() threads. Results come
/// back in index order. Exceptions propagate from the first failing index.
template <class Fn>
auto parallel_map(std::size_t count, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out;
    out.reserve(count);
    const std::size_t workers = worker_limit();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
        return out;
    }
    for (std::size_t start = 0; start < count; start += workers) {
        std::vector<std::future<R>> batch;
        for (std::size_t i = start; i < count && i < start + workers; ++i) {
            batch.push_back(std::async(std::launch::async, fn, i));
        }
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

}  // namespace semilab
