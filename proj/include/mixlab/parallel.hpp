#pragma once

#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mixlab {

// Every parallel kernel keeps its serial loop reachable through Policy::serial.
// Both paths must produce bit-identical results; tests compare them.
enum class Policy { serial, parallel };

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Exceptions must not leave an OpenMP region. Loop bodies run through
// `guard`; the exception of the lowest failing index is rethrown afterwards,
// which is also what the serial loop would have thrown first.
class ExceptionTrap {
 public:
  template <class F>
  void guard(std::int64_t index, F&& body) noexcept {
    try {
      body();
    } catch (...) {
#pragma omp critical(mixlab_exception_trap)
      {
        if (!error_ || index < index_) {
          error_ = std::current_exception();
          index_ = index;
        }
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
  std::int64_t index_ = 0;
};

}  // namespace mixlab
