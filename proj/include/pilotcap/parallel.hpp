// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace pilotcap {

/// Worker count: PILOTCAP_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (0 or unset means auto).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers write results
/// into slots keyed by i, so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pilotcap
