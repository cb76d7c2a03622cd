#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace recon {

/// Worker count: hardware concurrency capped by the RECON_THREADS env var.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("RECON_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

/// Runs fn(block) for block = 0..n_blocks-1 across workers. Block results
/// must be written to disjoint, pre-assigned locations so the outcome is
/// independent of scheduling.
inline void parallel_blocks(int n_blocks, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n_blocks);
    if (workers <= 1) {
        for (int b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int b = w; b < n_blocks; b += workers) fn(b);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace recon
