#pragma once

#include <array>
#include <cstddef>
#include <functional>

namespace htl {

// Evaluation point in R^n, n = 1 or 2. The second coordinate is ignored
// when the object it is fed to has dimension 1.
using Point = std::array<double, 2>;

// Number of worker threads: HTL_THREADS if set, else hardware concurrency.
int thread_budget();

// Runs body(i) for i in [0, n) on a fixed contiguous partition of the index
// range. Bodies must write only to slots owned by their index, so results are
// identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace htl
