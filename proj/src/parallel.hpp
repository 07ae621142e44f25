// parallel.hpp
//
// Tiny index-parallel loop. Tasks write to preallocated slots keyed by
// index, so parallel and serial runs aggregate identically.

#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

#include "dex/rng.hpp"

namespace dex::detail {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(thread_cap(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dex::detail
