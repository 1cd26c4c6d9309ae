#pragma once

#include <cstddef>
#include <functional>

namespace wavemech {

/// Worker count used by parallel_for. Defaults to WAVEMECH_THREADS from the
/// environment, else 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(begin, end) over disjoint contiguous slabs of [0, n). Work
/// must be pointwise: results may not depend on the partitioning.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace wavemech
