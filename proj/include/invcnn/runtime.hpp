#ifndef INVCNN_RUNTIME_HPP
#define INVCNN_RUNTIME_HPP

// Process-level knobs for executables.

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace invcnn {

/// Training allocates and frees many mid-sized Eigen temporaries per step.
/// glibc serves those with mmap/munmap by default, which dominates runtime;
/// raising the thresholds keeps them on the heap. No-op elsewhere.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
}

}  // namespace invcnn

#endif  // INVCNN_RUNTIME_HPP
