#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spadapt {

/// Selects the kernel variant. `serial` is the reference implementation the
/// tests compare the OpenMP kernels against.
enum class Exec { serial, parallel };

/// Worker count for OpenMP regions; 0 keeps the runtime default.
void set_thread_count(int threads);
int thread_count();

/// Thread count from SPATIAL_ADAPT_THREADS, or 0 when unset.
int threads_from_env();

/// Runs fn(r) for r in [0, count) and returns the results in replicate order.
/// Each replicate must derive its randomness from r alone.
template <class Result>
std::vector<Result> run_replicates(std::size_t count, const std::function<Result(std::size_t)>& fn,
                                   Exec exec = Exec::parallel) {
  std::vector<Result> out(count);
  if (exec == Exec::serial) {
    for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
    return out;
  }
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
  return out;
}

}  // namespace spadapt
