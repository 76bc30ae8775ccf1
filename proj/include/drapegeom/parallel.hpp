#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace drapegeom {

// Thread budget for internal loops. Reads DRAPEGEOM_THREADS once; values < 1
// fall back to the hardware count.
int max_threads();

// Runs fn(begin, end) over a partition of [0, n). Blocks are contiguous and
// each index is visited exactly once, so per-slot writes are race-free and
// the result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Convenience per-index form.
void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

// Fixed-tree pairwise summation. The reduction tree depends only on the
// length, so sums are bit-identical across runs and thread counts. All scalar
// loss/metric reductions in this library go through here.
double pairwise_sum(std::span<const double> xs);

}  // namespace drapegeom
