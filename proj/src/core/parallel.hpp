// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace cvm {

/// Cap on worker threads used by parallel_for. 0 restores the default
/// (hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, n). Tasks must write disjoint outputs, so the
/// result is identical to the sequential loop. The first exception thrown by
/// any task is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace cvm
