#pragma once

#include "lhv/simd/kernels.hpp"

namespace lhv::simd::detail {

extern const KernelTable scalar_table;
#ifdef LHV_HAVE_AVX2
extern const KernelTable avx2_table;
#endif

}  // namespace lhv::simd::detail
