#include "spadapt/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace spadapt {

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

int threads_from_env() {
  const char* v = std::getenv("SPATIAL_ADAPT_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    return std::max(0, std::stoi(v));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace spadapt
