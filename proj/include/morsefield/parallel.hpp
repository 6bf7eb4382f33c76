#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace morsefield {

/// kSerial is the reference path kept for testing; kParallel uses OpenMP.
/// Both write results into fixed slots, so outputs are identical.
enum class Execution { kSerial, kParallel };

/// Runs body(i) for i in [0, count). Exceptions are collected per index and the
/// lowest-index one is rethrown after the loop, independent of scheduling.
template <class Body>
void for_each_index(std::size_t count, Execution exec, const Body& body) {
  std::vector<std::exception_ptr> errors(count);
  const long long n = static_cast<long long>(count);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace morsefield
