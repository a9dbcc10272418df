#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ccw {

enum class ExecMode { Serial, OpenMP };

inline ExecMode default_exec_mode() {
#if defined(_OPENMP)
    return ExecMode::OpenMP;
#else
    return ExecMode::Serial;
#endif
}

// Runs fn(i) for i in [0, n). Each task writes only to its own output slot,
// so the result is identical under both modes; tests rely on that.
// Exceptions are captured and rethrown after the loop (first one wins).
inline void run_indexed(std::size_t n, const std::function<void(std::size_t)>& fn,
                        ExecMode mode = default_exec_mode()) {
    if (mode == ExecMode::Serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
#if defined(_OPENMP)
    std::exception_ptr err;
    std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
#else
    for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace ccw
