#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mdlvq {

// Runs body(b) for b in [0, blocks) on up to `workers` threads. Results land in per-block slots, so the
// caller's merge order (and therefore its output) does not depend on the worker count.
template <class Body>
void forEachBlock(int64_t blocks, int workers, Body&& body) {
    workers = std::max(1, workers);
    if (workers == 1 || blocks <= 1) {
        for (int64_t b = 0; b < blocks; ++b) body(b);
        return;
    }
    std::atomic<int64_t> next{0};
    std::exception_ptr err;
    std::mutex errMu;
    auto run = [&] {
        for (;;) {
            const int64_t b = next.fetch_add(1);
            if (b >= blocks) return;
            try {
                body(b);
            } catch (...) {
                std::lock_guard lk(errMu);
                if (!err) err = std::current_exception();
                next.store(blocks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int64_t spawn = std::min<int64_t>(workers, blocks);
    for (int64_t t = 0; t < spawn; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace mdlvq
