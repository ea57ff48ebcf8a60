#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "parksun/raster.hpp"

namespace parksun {

// Worker count used by the row-parallel kernels. 0 selects
// std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count();

/// Runs fn(row_begin, row_end) over contiguous row blocks. Each row is
/// visited by exactly one call, so kernels that only write their own rows
/// produce identical output for any worker count.
template <class Fn>
void parallel_rows(Index nrows, Fn&& fn) {
    const Index workers = std::min<Index>(thread_count(), nrows);
    if (workers <= 1) {
        fn(Index{0}, nrows);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        // Interleaved blocks of a few rows balance kernels whose cost varies
        // across the grid (e.g. shadow marching near tall objects).
        const Index block = std::max<Index>(1, nrows / (workers * 8));
        for (Index w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (Index start = w * block; start < nrows; start += workers * block)
                        fn(start, std::min(nrows, start + block));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace parksun
