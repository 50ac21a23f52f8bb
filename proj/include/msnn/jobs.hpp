#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace msnn {

/// Worker count used when a caller passes 0: the OpenMP default.
std::size_t default_jobs();

/// Runs job(0..n-1) on up to `jobs` threads. Failures are captured per job,
/// never propagated; the returned vector holds nullptr for successful jobs.
std::vector<std::exception_ptr> run_jobs(std::size_t n, std::size_t jobs,
                                         const std::function<void(std::size_t)>& job);

}  // namespace msnn
