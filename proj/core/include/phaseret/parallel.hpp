#pragma once

#include <cstdint>
#include <functional>

namespace phaseret {

// Deterministic chunked parallel loop: [0, n) is split into contiguous
// ranges, one per worker. Each range is written by exactly one worker and
// per-element reduction order is fixed, so results do not depend on the
// worker count.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t begin, std::int64_t end)>& body);

int max_threads();
void set_max_threads(int n);

}  // namespace phaseret
