#pragma once

#include <cstddef>
#include <functional>

namespace codnopt {

// Worker budget for parallel sections. CODNOPT_THREADS caps it; 0 or unset
// means one worker per hardware thread.
int worker_count();

// Runs fn(i) for every i in [0, n). Splits the range across workers when
// there is more than one; fn must only touch state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace codnopt
