// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_PARALLEL_HPP
#define OCC_PARALLEL_HPP

#if defined(_OPENMP)
#include <omp.h>
#define OccPragmaOmpHelper(x) _Pragma(#x)
#define OccPragmaOmp(x) OccPragmaOmpHelper(omp x)
#else
#define OccPragmaOmp(x)
#endif

namespace occ {

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_num_threads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace occ

#endif  // OCC_PARALLEL_HPP
