#include "hice/parallel.hpp"

#include <thread>

namespace hice {

int default_thread_count() noexcept {
#ifdef _OPENMP
  return omp_get_num_procs();
#else
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

}  // namespace hice
