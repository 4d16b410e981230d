#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fpt {

/// Worker cap: FPT_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Run body(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; if bodies throw, the exception from the lowest index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

/// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> xs);

}  // namespace fpt
