#pragma once

#include <cstddef>
#include <functional>

namespace sign {

// Process-wide thread hint. Parallel kernels partition work by output row, so
// results are bitwise-identical for any thread count.
void set_num_threads(int n);
int num_threads();

// Calls fn(begin, end) on contiguous chunks of [0, n). fn must only write
// state owned by its chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace sign
