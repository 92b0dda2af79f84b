#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shclab {

/// Paths per reduction block. Block partials are combined by a fixed pairwise
/// tree, so parallel results do not depend on the thread count.
inline constexpr std::size_t kBlockSize = 256;

inline int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <class Acc>
Acc tree_reduce(std::vector<Acc>& parts) {
    if (parts.empty()) return Acc{};
    std::size_t n = parts.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) parts[i].merge(parts[i + half]);
        n = half;
    }
    return parts[0];
}

/// Sums fn(acc, workspace, i) over i in [0, n).
///
/// Acc needs a default constructor and merge(const Acc&). The workspace is
/// created once per thread by make_ws(). With serial = true the items are
/// accumulated sequentially into one Acc, the reference the parallel
/// path is tested against.
template <class Acc, class MakeWs, class Fn>
Acc reduce_paths(std::size_t n, bool serial, MakeWs&& make_ws, Fn&& fn) {
    if (serial) {
        auto ws = make_ws();
        Acc acc{};
        for (std::size_t i = 0; i < n; ++i) fn(acc, ws, i);
        return acc;
    }
    const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<Acc> parts(blocks);
    std::exception_ptr error;
#pragma omp parallel
    {
        auto ws = make_ws();
#pragma omp for schedule(dynamic, 1)
        for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
            try {
                Acc acc{};
                const std::size_t lo = static_cast<std::size_t>(b) * kBlockSize;
                const std::size_t hi = std::min(n, lo + kBlockSize);
                for (std::size_t i = lo; i < hi; ++i) fn(acc, ws, i);
                parts[b] = std::move(acc);
            } catch (...) {
#pragma omp critical(shclab_reduce_error)
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
    return tree_reduce(parts);
}

}  // namespace shclab
