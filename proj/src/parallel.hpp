#pragma once

#include <cstddef>
#include <cstdint>

#include "hypwhitney/audit.hpp"

namespace hw::detail {

// Runs f(i) for i in [0,n). Each index owns its output slot, so the result
// is identical whether or not OpenMP distributes the loop.
template <class F>
void for_each_index(std::size_t n, F&& f) {
  if (serial_mode()) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::int64_t m = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < m; ++i) f(static_cast<std::size_t>(i));
}

}  // namespace hw::detail
