#pragma once

#include <cstdint>
#include <exception>
#include <mutex>

#include <omp.h>

namespace toda {

enum class Exec { Serial, Parallel };

struct ExecPolicy {
    Exec mode = Exec::Parallel;
    int workers = 0;  // 0: OpenMP default
};

// Runs fn(b) for b in [0, n_blocks). The block partition is fixed by the caller,
// so results are independent of the worker count as long as fn writes only to slot b.
template <class Fn>
void for_each_block(const ExecPolicy& policy, std::int64_t n_blocks, Fn&& fn) {
    if (policy.mode == Exec::Serial) {
        for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    const int threads = policy.workers > 0 ? policy.workers : omp_get_max_threads();
    std::exception_ptr first;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        try {
            fn(b);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace toda
