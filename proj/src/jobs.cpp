#include "msnn/jobs.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace msnn {

std::size_t default_jobs() {
#ifdef _OPENMP
  return static_cast<std::size_t>(omp_get_max_threads());
#else
  return 1;
#endif
}

std::vector<std::exception_ptr> run_jobs(std::size_t n, std::size_t jobs,
                                         const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs == 0) jobs = default_jobs();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(jobs)) if (jobs > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      job(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  return errors;
}

}  // namespace msnn
