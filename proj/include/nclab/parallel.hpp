#pragma once

#include <cstddef>
#include <functional>

namespace nclab {

/// Worker count used when a caller does not pass one. Starts at the hardware
/// concurrency; forced to 1 when NCLAB_DETERMINISTIC=1 is set.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [0, count). Each index must write only its own output slot;
/// callers reduce afterwards in index order, so results do not depend on thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace nclab
