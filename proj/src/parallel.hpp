#pragma once

// Execution policy for the grid kernels. Every parallel kernel has a serial
// twin; reductions accumulate per-row partials that are combined in index
// order, so results are bit-identical for any thread count.

#include <cstddef>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace lawson {

enum class Exec { serial, parallel };

template <typename F>
void parallel_for(Exec exec, std::size_t n, F&& body) {
    if (exec == Exec::parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) body(i);
}

// Row-wise reduction: partial[i] = row_value(i), combined serially in index
// order afterwards.
template <typename F>
double ordered_row_sum(Exec exec, std::size_t rows, F&& row_value) {
    std::vector<double> partial(rows, 0.0);
    parallel_for(exec, rows, [&](std::size_t i) { partial[i] = row_value(i); });
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += partial[i];
    return s;
}

template <typename F>
double ordered_row_max(Exec exec, std::size_t rows, F&& row_value) {
    std::vector<double> partial(rows, 0.0);
    parallel_for(exec, rows, [&](std::size_t i) { partial[i] = row_value(i); });
    double m = -1e300;
    for (std::size_t i = 0; i < rows; ++i) m = partial[i] > m ? partial[i] : m;
    return m;
}

}  // namespace lawson
